use num_bigint::BigUint;

use super::ast::Loc;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigUint),
    // keywords
    Contract,
    Constructor,
    Function,
    Public,
    Internal,
    UInt,
    Address,
    Bool,
    Mapping,
    Require,
    Assert,
    Revert,
    If,
    Else,
    While,
    For,
    True,
    False,
    Msg,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Arrow, // =>
    Assign,
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    PercentAssign,
    PlusPlus,
    MinusMinus,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Contract => "contract",
            Tok::Constructor => "constructor",
            Tok::Function => "function",
            Tok::Public => "public",
            Tok::Internal => "internal",
            Tok::UInt => "uint",
            Tok::Address => "address",
            Tok::Bool => "bool",
            Tok::Mapping => "mapping",
            Tok::Require => "require",
            Tok::Assert => "assert",
            Tok::Revert => "revert",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::For => "for",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Msg => "msg",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Arrow => "=>",
            Tok::Assign => "=",
            Tok::Eq => "==",
            Tok::Ne => "!=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::PlusAssign => "+=",
            Tok::MinusAssign => "-=",
            Tok::StarAssign => "*=",
            Tok::SlashAssign => "/=",
            Tok::PercentAssign => "%=",
            Tok::PlusPlus => "++",
            Tok::MinusMinus => "--",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $loc:expr) => {
            tokens.push(Token { tok: $tok, loc: $loc })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        let advance = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(&mut i, &mut col, 1),
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '*' => {
                i += 2;
                col += 2;
                loop {
                    if i + 1 >= chars.len() {
                        return Err(FrontendError::syntax(loc, "unterminated block comment"));
                    }
                    if chars[i] == '*' && chars[i + 1] == '/' {
                        i += 2;
                        col += 2;
                        break;
                    }
                    if chars[i] == '\n' {
                        line += 1;
                        col = 1;
                        i += 1;
                    } else {
                        i += 1;
                        col += 1;
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let tok = match word.as_str() {
                    "contract" => Tok::Contract,
                    "constructor" => Tok::Constructor,
                    "function" => Tok::Function,
                    "public" => Tok::Public,
                    "internal" => Tok::Internal,
                    "uint" => Tok::UInt,
                    "address" => Tok::Address,
                    "bool" => Tok::Bool,
                    "mapping" => Tok::Mapping,
                    "require" => Tok::Require,
                    "assert" => Tok::Assert,
                    "revert" => Tok::Revert,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "for" => Tok::For,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "msg" => Tok::Msg,
                    _ => Tok::Ident(word),
                };
                push!(tok, loc);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let hex = c == '0' && i + 1 < chars.len() && (chars[i + 1] == 'x' || chars[i + 1] == 'X');
                if hex {
                    i += 2;
                    while i < chars.len() && chars[i].is_ascii_hexdigit() {
                        i += 1;
                    }
                    if i == start + 2 {
                        return Err(FrontendError::syntax(loc, "hex literal without digits"));
                    }
                } else {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let value = if hex {
                    BigUint::parse_bytes(text[2..].as_bytes(), 16)
                } else {
                    BigUint::parse_bytes(text.as_bytes(), 10)
                }
                .ok_or_else(|| FrontendError::syntax(loc, format!("bad number literal `{text}`")))?;
                push!(Tok::Num(value), loc);
            }
            _ => {
                let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let (tok, len) = match two.as_str() {
                    "=>" => (Tok::Arrow, 2),
                    "==" => (Tok::Eq, 2),
                    "!=" => (Tok::Ne, 2),
                    "<=" => (Tok::Le, 2),
                    ">=" => (Tok::Ge, 2),
                    "+=" => (Tok::PlusAssign, 2),
                    "-=" => (Tok::MinusAssign, 2),
                    "*=" => (Tok::StarAssign, 2),
                    "/=" => (Tok::SlashAssign, 2),
                    "%=" => (Tok::PercentAssign, 2),
                    "++" => (Tok::PlusPlus, 2),
                    "--" => (Tok::MinusMinus, 2),
                    "&&" => (Tok::AndAnd, 2),
                    "||" => (Tok::OrOr, 2),
                    _ => {
                        let single = match c {
                            '{' => Tok::LBrace,
                            '}' => Tok::RBrace,
                            '(' => Tok::LParen,
                            ')' => Tok::RParen,
                            '[' => Tok::LBracket,
                            ']' => Tok::RBracket,
                            ';' => Tok::Semi,
                            ',' => Tok::Comma,
                            '.' => Tok::Dot,
                            '=' => Tok::Assign,
                            '<' => Tok::Lt,
                            '>' => Tok::Gt,
                            '+' => Tok::Plus,
                            '-' => Tok::Minus,
                            '*' => Tok::Star,
                            '/' => Tok::Slash,
                            '%' => Tok::Percent,
                            '!' => Tok::Bang,
                            other => {
                                return Err(FrontendError::syntax(
                                    loc,
                                    format!("unexpected character `{other}`"),
                                ))
                            }
                        };
                        (single, 1)
                    }
                };
                advance(&mut i, &mut col, len);
                push!(tok, loc);
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, loc: Loc { line, col } });
    Ok(tokens)
}
