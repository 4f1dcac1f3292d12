//! Variable typing environments shared by the post-parse passes.

use std::collections::HashMap;

use super::ast::{Contract, Function, Type};

#[derive(Debug, Clone)]
pub struct VarTypes {
    map: HashMap<String, Type>,
}

impl VarTypes {
    /// Globals plus one function's parameters and locals.
    pub fn for_function(contract: &Contract, function: &Function) -> Self {
        let mut map: HashMap<String, Type> =
            contract.globals.iter().map(|g| (g.name.clone(), g.ty)).collect();
        for (name, ty) in function.params.iter().chain(function.locals.iter()) {
            map.insert(name.clone(), *ty);
        }
        VarTypes { map }
    }

    pub fn lookup(&self, name: &str) -> Option<Type> {
        self.map.get(name).copied()
    }
}
