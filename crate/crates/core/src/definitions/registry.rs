use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;

use super::{recognize_shape, symbols_of, DefinedFamily, DefinitionError};
use crate::kernel::{check_existence, ExistenceCertificate, ExistenceMode, KernelError};
use crate::syntax::{Ident, InterpretedSymbol, Term};

/// Builtins evaluated numerically only; they have no characterization and
/// cannot be expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumericBuiltin {
    Pi,
    Sqrt,
}

impl NumericBuiltin {
    pub fn symbol(self) -> InterpretedSymbol {
        match self {
            NumericBuiltin::Pi => InterpretedSymbol::uninterpreted("pi", 0),
            NumericBuiltin::Sqrt => InterpretedSymbol::uninterpreted("sqrt", 1),
        }
    }

    pub fn of(symbol: &InterpretedSymbol) -> Option<NumericBuiltin> {
        if symbol.interpretation.is_some() {
            return None;
        }
        match (symbol.name.as_str(), symbol.arity) {
            ("pi", 0) => Some(NumericBuiltin::Pi),
            ("sqrt", 1) => Some(NumericBuiltin::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct RegisteredFamily {
    pub family: DefinedFamily,
    pub symbols: Vec<InterpretedSymbol>,
    pub existence: Result<ExistenceCertificate, KernelError>,
    pub builtin: bool,
}

impl RegisteredFamily {
    fn new(family: DefinedFamily, mode: ExistenceMode, builtin: bool) -> Result<Self, DefinitionError> {
        let symbols = symbols_of(&family)?;
        let existence = check_existence(&family, mode);
        Ok(RegisteredFamily { family, symbols, existence, builtin })
    }

    pub fn is_assumed(&self) -> bool {
        self.existence.as_ref().is_ok_and(|c| c.is_assumed())
    }
}

/// What a function symbol stands for.
#[derive(Clone, Debug)]
pub enum SymbolInfo {
    Family { family: Arc<RegisteredFamily>, index: usize },
    Numeric(NumericBuiltin),
}

#[derive(Clone, Debug)]
pub struct Registry {
    symbols: IndexMap<Ident, SymbolInfo>,
    families: Vec<Arc<RegisteredFamily>>,
    mode: ExistenceMode,
}

pub fn builtin_registry() -> Registry {
    Registry::new(ExistenceMode::Sound)
}

fn builtin_families() -> Vec<DefinedFamily> {
    let t = || Ident::new("t");
    let fam = |names: &[&str], rhs: Vec<Term>, init: Vec<i64>| {
        DefinedFamily::new(
            names.iter().map(|n| Ident::new(*n)).collect(),
            rhs,
            t(),
            init.into_iter().map(Term::int).collect(),
            Term::int(0),
        )
        .expect("builtin families are well-formed")
    };
    vec![
        fam(&["sin", "cos"], vec![Term::var("cos"), -Term::var("sin")], vec![0, 1]),
        fam(&["exp"], vec![Term::var("exp")], vec![1]),
        fam(&["tanh"], vec![Term::int(1) - Term::var("tanh").pow(2)], vec![0]),
    ]
}

fn builtin_symbols() -> &'static [InterpretedSymbol] {
    static SYMBOLS: OnceLock<Vec<InterpretedSymbol>> = OnceLock::new();
    SYMBOLS.get_or_init(|| {
        let mut out: Vec<InterpretedSymbol> =
            builtin_families().iter().flat_map(|f| symbols_of(f).expect("builtin")).collect();
        out.push(NumericBuiltin::Pi.symbol());
        out.push(NumericBuiltin::Sqrt.symbol());
        out
    })
}

/// Whether the symbol is one of the builtins exactly (same name and the same
/// characterization).
pub fn is_builtin_symbol(symbol: &InterpretedSymbol) -> bool {
    builtin_symbols().contains(symbol)
}

/// The builtin symbol with this name, if any.
pub fn builtin_symbol(name: &str) -> Option<&'static InterpretedSymbol> {
    builtin_symbols().iter().find(|s| s.name.as_str() == name)
}

impl Registry {
    pub fn new(mode: ExistenceMode) -> Self {
        let mut reg = Registry { symbols: IndexMap::new(), families: Vec::new(), mode };
        for family in builtin_families() {
            reg.insert_family(family, true).expect("builtins do not clash");
        }
        for n in [NumericBuiltin::Pi, NumericBuiltin::Sqrt] {
            reg.symbols.insert(n.symbol().name, SymbolInfo::Numeric(n));
        }
        reg
    }

    pub fn mode(&self) -> ExistenceMode {
        self.mode
    }

    fn insert_family(&mut self, family: DefinedFamily, builtin: bool) -> Result<Vec<InterpretedSymbol>, DefinitionError> {
        let entry = Arc::new(RegisteredFamily::new(family, self.mode, builtin)?);
        for (index, s) in entry.symbols.iter().enumerate() {
            self.symbols.insert(s.name.clone(), SymbolInfo::Family { family: entry.clone(), index });
        }
        let symbols = entry.symbols.clone();
        self.families.push(entry);
        Ok(symbols)
    }

    /// Registers a user family. Redeclaring a builtin family verbatim is
    /// accepted and returns the builtin symbols; any other reuse of a name
    /// is a shadowing error.
    pub fn register_family(&mut self, family: DefinedFamily) -> Result<Vec<InterpretedSymbol>, DefinitionError> {
        for name in family.names() {
            match self.symbols.get(name) {
                None => {}
                Some(SymbolInfo::Family { family: existing, .. }) if existing.builtin && existing.family == family => {
                    return Ok(existing.symbols.clone());
                }
                Some(_) => return Err(DefinitionError::ShadowingError(name.clone())),
            }
        }
        if family.names().iter().any(|n| builtin_symbol(n.as_str()).is_some()) {
            return Err(DefinitionError::ShadowingError(family.names()[0].clone()));
        }
        self.insert_family(family, false)
    }

    pub fn get(&self, name: &str) -> Option<&SymbolInfo> {
        self.symbols.get(name)
    }

    pub fn symbol(&self, name: &str) -> Option<InterpretedSymbol> {
        match self.symbols.get(name)? {
            SymbolInfo::Family { family, index } => Some(family.symbols[*index].clone()),
            SymbolInfo::Numeric(n) => Some(n.symbol()),
        }
    }

    pub fn families(&self) -> &[Arc<RegisteredFamily>] {
        &self.families
    }

    pub fn names(&self) -> impl Iterator<Item = &Ident> {
        self.symbols.keys()
    }

    /// Resolves a symbol occurring in a term: registered symbols by name,
    /// other shape-conforming annotations ad hoc (with a fresh existence
    /// check).
    pub fn resolve(&self, symbol: &InterpretedSymbol) -> Option<SymbolInfo> {
        if let Some(info) = self.symbols.get(&symbol.name) {
            let same = match info {
                SymbolInfo::Family { family, index } => family.symbols[*index] == *symbol,
                SymbolInfo::Numeric(n) => n.symbol() == *symbol,
            };
            if same {
                return Some(info.clone());
            }
        }
        if let Some(n) = NumericBuiltin::of(symbol) {
            return Some(SymbolInfo::Numeric(n));
        }
        let phi = symbol.interpretation.as_ref()?;
        let (family, index) = recognize_shape(phi)?;
        if let Some(existing) = self.families.iter().find(|f| f.family == family) {
            return Some(SymbolInfo::Family { family: existing.clone(), index });
        }
        let entry = RegisteredFamily::new(family, self.mode, false).ok()?;
        Some(SymbolInfo::Family { family: Arc::new(entry), index })
    }
}
