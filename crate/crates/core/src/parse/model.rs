use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::lexer::Tok;
use super::parser::{PResult, Parser, SymbolTable};
use super::SyntaxError;
use crate::definitions::{desugar_implicit, family_from_decl, DefinitionError, Registry};
use crate::kernel::ExistenceMode;
use crate::print::{PrintOptions, Printer};
use crate::syntax::vars::AllNames;
use crate::syntax::{Formula, Ident, InterpretedSymbol, Program, Term};

/// `implicit Real h1(Real t), ..., hn(Real t) = {{init};{ODE}}`
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitDecl {
    pub names: Vec<Ident>,
    pub argument: Ident,
    pub init_assignments: Vec<(Ident, Term)>,
    pub ode: Vec<(Ident, Term)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Definition {
    /// `Real g, L, k;`
    Constants(Vec<Ident>),
    Implicit(ImplicitDecl),
    /// `Real c = e;`
    TermAbbreviation(Ident, Term),
    /// `Bool P <-> φ;`
    FormulaAbbreviation(Ident, Formula),
    /// `HP a ::= {α};`
    ProgramAbbreviation(Ident, Program),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    /// Uniform over `[lo, hi]`.
    Range(Term, Term),
    /// Uniform over a finite set.
    OneOf(Vec<Term>),
}

/// One statement of the `Checks` block.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckItem {
    /// Initial value of a constant or variable.
    Sample { var: Ident, sampling: Sampling },
    /// Value computed from the values sampled so far.
    Let { var: Ident, value: Term },
    /// Range for nondeterministic assignments `x:=*`.
    Choose { var: Ident, lo: Term, hi: Term },
    /// Range of loop iteration counts.
    Loops { lo: u32, hi: u32 },
    /// Range of ODE durations.
    Duration { lo: Term, hi: Term },
    Horizon(Term),
    /// Program to simulate instead of the problem's first box modality.
    Simulate(Program),
    /// Formula monitored along simulated traces.
    Invariant { name: Ident, formula: Formula },
    /// Term whose magnitude must stay within tolerance along traces.
    Residual { name: Ident, term: Term },
    /// Lie derivative of `term` along the simulated ODE equals `expected`.
    Lie { name: Ident, term: Term, expected: Term },
    /// Formula evaluated at sampled initial states.
    Identity { name: Ident, formula: Formula },
    /// Function abstraction with back-substitution check.
    Abstract { name: Ident, formula: Formula, targets: Vec<Term>, names: Vec<Ident>, bounds: Vec<Formula> },
}

impl CheckItem {
    pub fn name(&self) -> Option<&Ident> {
        match self {
            CheckItem::Invariant { name, .. }
            | CheckItem::Residual { name, .. }
            | CheckItem::Lie { name, .. }
            | CheckItem::Identity { name, .. }
            | CheckItem::Abstract { name, .. } => Some(name),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checks {
    pub items: Vec<CheckItem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub definitions: Vec<Definition>,
    pub program_variables: Vec<Ident>,
    pub problem: Formula,
    pub checks: Option<Checks>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeclarationError {
    #[error("undeclared identifier {0}")]
    Undeclared(Ident),
    #[error("{0} is declared twice")]
    Duplicate(Ident),
    #[error(transparent)]
    Definition(#[from] DefinitionError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Declaration(#[from] DeclarationError),
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelError> {
    let mut p = Parser::new(text, SymbolTable::default())?;
    let mut declared: Vec<Ident> = Vec::new();
    let mut definitions = Vec::new();
    if p.eat_keyword("Definitions") {
        while !p.at_keyword("End") {
            let def = definition(&mut p)?;
            register(&mut p.table, &mut declared, &def)?;
            definitions.push(def);
        }
        block_end(&mut p)?;
    }
    let mut program_variables = Vec::new();
    if p.eat_keyword("ProgramVariables") {
        while !p.at_keyword("End") {
            p.expect_keyword("Real")?;
            for x in ident_list(&mut p)? {
                declare(&mut declared, &x)?;
                program_variables.push(x);
            }
            p.expect_sym(";")?;
        }
        block_end(&mut p)?;
    }
    p.expect_keyword("Problem")?;
    let problem = p.formula()?;
    block_end(&mut p)?;
    let checks = if p.eat_keyword("Checks") {
        let mut items = Vec::new();
        while !p.at_keyword("End") {
            items.push(check_item(&mut p)?);
        }
        block_end(&mut p)?;
        Some(Checks { items })
    } else {
        None
    };
    p.finish()?;
    let model = ModelFile { definitions, program_variables, problem, checks };
    model.check_declarations()?;
    Ok(model)
}

fn block_end(p: &mut Parser) -> PResult<()> {
    p.expect_keyword("End")?;
    p.expect_sym(".")
}

fn ident_list(p: &mut Parser) -> PResult<Vec<Ident>> {
    let mut out = vec![p.ident()?];
    while p.eat_sym(",") {
        out.push(p.ident()?);
    }
    Ok(out)
}

fn declare(declared: &mut Vec<Ident>, x: &Ident) -> Result<(), DeclarationError> {
    if declared.contains(x) {
        return Err(DeclarationError::Duplicate(x.clone()));
    }
    declared.push(x.clone());
    Ok(())
}

fn definition(p: &mut Parser) -> PResult<Definition> {
    if p.eat_keyword("implicit") {
        return implicit(p).map(Definition::Implicit);
    }
    if p.eat_keyword("Bool") {
        let name = p.ident()?;
        p.expect_sym("<->")?;
        let f = p.formula()?;
        p.expect_sym(";")?;
        return Ok(Definition::FormulaAbbreviation(name, f));
    }
    if p.eat_keyword("HP") {
        let name = p.ident()?;
        p.expect_sym("::=")?;
        let a = p.program()?;
        p.expect_sym(";")?;
        return Ok(Definition::ProgramAbbreviation(name, a));
    }
    p.expect_keyword("Real")?;
    let names = ident_list(p)?;
    if names.len() == 1 && p.eat_sym("=") {
        let e = p.term()?;
        p.expect_sym(";")?;
        return Ok(Definition::TermAbbreviation(names[0].clone(), e));
    }
    p.expect_sym(";")?;
    Ok(Definition::Constants(names))
}

fn implicit(p: &mut Parser) -> PResult<ImplicitDecl> {
    p.expect_keyword("Real")?;
    let mut names = Vec::new();
    let mut argument: Option<Ident> = None;
    loop {
        names.push(p.ident()?);
        p.expect_sym("(")?;
        p.expect_keyword("Real")?;
        let arg = p.ident()?;
        match &argument {
            Some(a) if *a != arg => {
                return Err(p.error_here("all functions of one implicit family take the same argument"));
            }
            _ => argument = Some(arg),
        }
        p.expect_sym(")")?;
        if !p.eat_sym(",") {
            break;
        }
    }
    p.eat_sym("'");
    p.expect_sym("=")?;
    p.expect_sym("{")?;
    p.expect_sym("{")?;
    let mut init_assignments = Vec::new();
    while !p.at_sym("}") {
        let x = p.ident()?;
        p.expect_sym(":=")?;
        init_assignments.push((x, p.term()?));
        p.expect_sym(";")?;
    }
    p.expect_sym("}")?;
    p.eat_sym(";");
    p.expect_sym("{")?;
    let ode = p.ode_body()?;
    if ode.domain != Formula::True {
        return Err(p.error_here("implicit definitions take no domain constraint"));
    }
    p.expect_sym("}")?;
    p.expect_sym("}")?;
    p.expect_sym(";")?;
    Ok(ImplicitDecl { names, argument: argument.expect("at least one name"), init_assignments, ode: ode.equations })
}

/// Makes a definition visible to the rest of the file.
fn register(table: &mut SymbolTable, declared: &mut Vec<Ident>, def: &Definition) -> Result<(), ModelError> {
    match def {
        Definition::Constants(xs) => {
            for x in xs {
                declare(declared, x)?;
            }
        }
        Definition::Implicit(decl) => {
            for s in desugar_implicit(decl).map_err(DeclarationError::from)? {
                match table.functions.get(&s.name) {
                    Some(_) => return Err(DeclarationError::Duplicate(s.name.clone()).into()),
                    None => {
                        if let Some(b) = crate::definitions::registry::builtin_symbol(s.name.as_str()) {
                            if *b != s {
                                return Err(DeclarationError::from(DefinitionError::ShadowingError(s.name)).into());
                            }
                        }
                        if declared.contains(&s.name) {
                            return Err(DeclarationError::Duplicate(s.name.clone()).into());
                        }
                    }
                }
                table.functions.insert(s.name.clone(), s);
            }
        }
        Definition::TermAbbreviation(x, e) => {
            declare(declared, x)?;
            table.terms.insert(x.clone(), e.clone());
        }
        Definition::FormulaAbbreviation(x, f) => {
            declare(declared, x)?;
            table.formulas.insert(x.clone(), f.clone());
        }
        Definition::ProgramAbbreviation(x, a) => {
            declare(declared, x)?;
            table.programs.insert(x.clone(), a.clone());
        }
    }
    Ok(())
}

fn range(p: &mut Parser) -> PResult<(Term, Term)> {
    p.expect_sym("[")?;
    let lo = p.term()?;
    p.expect_sym(",")?;
    let hi = p.term()?;
    p.expect_sym("]")?;
    Ok((lo, hi))
}

fn natural(p: &mut Parser) -> PResult<u32> {
    let n = p.number()?;
    if !n.is_integer() || *n.numer() < 0 || *n.numer() > u32::MAX as i64 {
        return Err(p.error_here("expected a natural number"));
    }
    Ok(*n.numer() as u32)
}

fn check_item(p: &mut Parser) -> PResult<CheckItem> {
    let Tok::Ident(kw) = p.peek().clone() else {
        return Err(p.error("expected a check statement"));
    };
    let labelled = |p: &mut Parser| -> PResult<Ident> {
        let name = p.ident()?;
        p.expect_sym(":")?;
        Ok(name)
    };
    p.expect_keyword(&kw)?;
    let item = match kw.as_str() {
        "sample" => {
            let var = p.ident()?;
            p.expect_keyword("in")?;
            let sampling = if p.eat_sym("{") {
                let mut values = vec![p.term()?];
                while p.eat_sym(",") {
                    values.push(p.term()?);
                }
                p.expect_sym("}")?;
                Sampling::OneOf(values)
            } else {
                let (lo, hi) = range(p)?;
                Sampling::Range(lo, hi)
            };
            CheckItem::Sample { var, sampling }
        }
        "let" => {
            let var = p.ident()?;
            p.expect_sym("=")?;
            CheckItem::Let { var, value: p.term()? }
        }
        "choose" => {
            let var = p.ident()?;
            p.expect_keyword("in")?;
            let (lo, hi) = range(p)?;
            CheckItem::Choose { var, lo, hi }
        }
        "loops" => {
            p.expect_sym("[")?;
            let lo = natural(p)?;
            p.expect_sym(",")?;
            let hi = natural(p)?;
            p.expect_sym("]")?;
            CheckItem::Loops { lo, hi }
        }
        "duration" => {
            let (lo, hi) = range(p)?;
            CheckItem::Duration { lo, hi }
        }
        "horizon" => CheckItem::Horizon(p.term()?),
        "simulate" => CheckItem::Simulate(p.program()?),
        "invariant" => {
            let name = labelled(p)?;
            CheckItem::Invariant { name, formula: p.formula()? }
        }
        "residual" => {
            let name = labelled(p)?;
            CheckItem::Residual { name, term: p.term()? }
        }
        "lie" => {
            let name = labelled(p)?;
            let term = p.term()?;
            p.expect_sym("=")?;
            CheckItem::Lie { name, term, expected: p.term()? }
        }
        "identity" => {
            let name = labelled(p)?;
            CheckItem::Identity { name, formula: p.formula()? }
        }
        "abstract" => {
            let name = labelled(p)?;
            let formula = p.formula()?;
            p.expect_keyword("targets")?;
            let mut targets = vec![p.term()?];
            while p.eat_sym(",") {
                targets.push(p.term()?);
            }
            let names = if p.eat_keyword("as") { ident_list(p)? } else { Vec::new() };
            let mut bounds = Vec::new();
            if p.eat_keyword("bounds") {
                bounds.push(p.formula()?);
                while p.eat_sym(",") {
                    bounds.push(p.formula()?);
                }
            }
            CheckItem::Abstract { name, formula, targets, names, bounds }
        }
        other => return Err(p.error_here(&format!("unknown check statement {other}"))),
    };
    // a braced program may already have consumed the terminator
    if !matches!(item, CheckItem::Simulate(_)) || !p.after_sym(";") {
        p.expect_sym(";")?;
    }
    Ok(item)
}

/// Variables used in `f` that no quantifier in `f` binds.
fn unbound_names(f: &Formula) -> BTreeSet<Ident> {
    let mut quantified = BTreeSet::new();
    collect_quantified(f, &mut quantified);
    f.all_names().into_iter().filter(|x| !quantified.contains(x)).collect()
}

fn collect_quantified(f: &Formula, out: &mut BTreeSet<Ident>) {
    match f {
        Formula::Forall(x, p) | Formula::Exists(x, p) => {
            out.insert(x.clone());
            collect_quantified(p, out);
        }
        Formula::Not(p) => collect_quantified(p, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
            collect_quantified(a, out);
            collect_quantified(b, out);
        }
        Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
            let mut tests = Vec::new();
            program_formulas(a, &mut tests);
            for t in tests {
                collect_quantified(t, out);
            }
            collect_quantified(p, out);
        }
        Formula::True | Formula::False | Formula::Compare(..) => {}
    }
}

fn program_formulas<'a>(a: &'a Program, out: &mut Vec<&'a Formula>) {
    match a {
        Program::Test(f) => out.push(f),
        Program::Ode(ode) => out.push(&ode.domain),
        Program::IfThen(c, p) => {
            out.push(c);
            program_formulas(p, out);
        }
        Program::Choice(p, q) | Program::Sequence(p, q) => {
            program_formulas(p, out);
            program_formulas(q, out);
        }
        Program::Loop(p) => program_formulas(p, out),
        Program::Assign(..) | Program::AssignAny(_) => {}
    }
}

impl ModelFile {
    /// Constants, abbreviation names and program variables.
    pub fn declared_names(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        for d in &self.definitions {
            match d {
                Definition::Constants(xs) => out.extend(xs.iter().cloned()),
                Definition::TermAbbreviation(x, _)
                | Definition::FormulaAbbreviation(x, _)
                | Definition::ProgramAbbreviation(x, _) => out.push(x.clone()),
                Definition::Implicit(_) => {}
            }
        }
        out.extend(self.program_variables.iter().cloned());
        out
    }

    pub fn constants(&self) -> Vec<Ident> {
        self.definitions
            .iter()
            .filter_map(|d| match d {
                Definition::Constants(xs) => Some(xs.clone()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn implicit_decls(&self) -> impl Iterator<Item = &ImplicitDecl> {
        self.definitions.iter().filter_map(|d| match d {
            Definition::Implicit(decl) => Some(decl),
            _ => None,
        })
    }

    /// The annotated symbols introduced by the file's implicit declarations,
    /// in declaration order.
    pub fn declared_symbols(&self) -> Result<Vec<InterpretedSymbol>, DefinitionError> {
        let mut out = Vec::new();
        for decl in self.implicit_decls() {
            out.extend(desugar_implicit(decl)?);
        }
        Ok(out)
    }

    /// The builtin registry extended with the file's families.
    pub fn registry(&self, mode: ExistenceMode) -> Result<Registry, DefinitionError> {
        let mut reg = Registry::new(mode);
        for decl in self.implicit_decls() {
            reg.register_family(family_from_decl(decl)?)?;
        }
        Ok(reg)
    }

    fn check_declarations(&self) -> Result<(), DeclarationError> {
        let declared: BTreeSet<Ident> = self.declared_names().into_iter().collect();
        let undeclared = |names: BTreeSet<Ident>| names.into_iter().find(|x| !declared.contains(x));
        if let Some(x) = undeclared(unbound_names(&self.problem)) {
            return Err(DeclarationError::Undeclared(x));
        }
        let Some(checks) = &self.checks else { return Ok(()) };
        let fresh: BTreeSet<Ident> = checks
            .items
            .iter()
            .flat_map(|item| match item {
                CheckItem::Abstract { names, .. } => names.clone(),
                _ => Vec::new(),
            })
            .collect();
        for item in &checks.items {
            let mut names = BTreeSet::new();
            match item {
                CheckItem::Sample { var, sampling } => {
                    names.insert(var.clone());
                    match sampling {
                        Sampling::Range(lo, hi) => {
                            names.extend(lo.all_names());
                            names.extend(hi.all_names());
                        }
                        Sampling::OneOf(vs) => vs.iter().for_each(|v| names.extend(v.all_names())),
                    }
                }
                CheckItem::Let { var, value } => {
                    names.insert(var.clone());
                    names.extend(value.all_names());
                }
                CheckItem::Choose { var, lo, hi } => {
                    names.insert(var.clone());
                    names.extend(lo.all_names());
                    names.extend(hi.all_names());
                }
                CheckItem::Loops { .. } => {}
                CheckItem::Duration { lo, hi } => {
                    names.extend(lo.all_names());
                    names.extend(hi.all_names());
                }
                CheckItem::Horizon(e) | CheckItem::Residual { term: e, .. } => names.extend(e.all_names()),
                CheckItem::Simulate(a) => names.extend(unbound_names(&Formula::boxed(a.clone(), Formula::True))),
                CheckItem::Invariant { formula, .. } | CheckItem::Identity { formula, .. } => {
                    names.extend(unbound_names(formula))
                }
                CheckItem::Lie { term, expected, .. } => {
                    names.extend(term.all_names());
                    names.extend(expected.all_names());
                }
                CheckItem::Abstract { formula, targets, bounds, .. } => {
                    names.extend(unbound_names(formula));
                    targets.iter().for_each(|t| names.extend(t.all_names()));
                    bounds.iter().for_each(|b| names.extend(unbound_names(b)));
                }
            }
            if let Some(x) = undeclared(names.difference(&fresh).cloned().collect()) {
                return Err(DeclarationError::Undeclared(x));
            }
        }
        Ok(())
    }

    fn printer(&self) -> Printer {
        let known = self.declared_symbols().unwrap_or_default();
        Printer::with_known(PrintOptions::default(), known)
    }

    fn term(&self, e: &Term) -> String {
        self.printer().term_str(e)
    }

    fn formula(&self, f: &Formula) -> String {
        self.printer().formula_str(f)
    }

    fn program(&self, a: &Program) -> String {
        self.printer().program_str(a)
    }
}

fn join(xs: &[Ident]) -> String {
    xs.iter().map(Ident::as_str).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Definitions")?;
        for d in &self.definitions {
            match d {
                Definition::Constants(xs) => writeln!(f, "  Real {};", join(xs))?,
                Definition::TermAbbreviation(x, e) => writeln!(f, "  Real {x} = {};", self.term(e))?,
                Definition::FormulaAbbreviation(x, p) => writeln!(f, "  Bool {x} <-> {};", self.formula(p))?,
                Definition::ProgramAbbreviation(x, a) => writeln!(f, "  HP {x} ::= {{{}}};", self.program(a))?,
                Definition::Implicit(decl) => {
                    let heads: Vec<String> =
                        decl.names.iter().map(|n| format!("{n}(Real {})", decl.argument)).collect();
                    let init: String =
                        decl.init_assignments.iter().map(|(x, e)| format!("{x}:={};", self.term(e))).collect();
                    let ode: Vec<String> = decl.ode.iter().map(|(x, e)| format!("{x}'={}", self.term(e))).collect();
                    writeln!(f, "  implicit Real {} = {{{{{init}}};{{{}}}}};", heads.join(", "), ode.join(","))?;
                }
            }
        }
        writeln!(f, "End.\n")?;
        writeln!(f, "ProgramVariables")?;
        if !self.program_variables.is_empty() {
            writeln!(f, "  Real {};", join(&self.program_variables))?;
        }
        writeln!(f, "End.\n")?;
        writeln!(f, "Problem")?;
        writeln!(f, "  {}", self.formula(&self.problem))?;
        writeln!(f, "End.")?;
        if let Some(checks) = &self.checks {
            writeln!(f, "\nChecks")?;
            for item in &checks.items {
                writeln!(f, "  {};", self.check_item(item))?;
            }
            writeln!(f, "End.")?;
        }
        Ok(())
    }
}

impl ModelFile {
    fn check_item(&self, item: &CheckItem) -> String {
        match item {
            CheckItem::Sample { var, sampling: Sampling::Range(lo, hi) } => {
                format!("sample {var} in [{}, {}]", self.term(lo), self.term(hi))
            }
            CheckItem::Sample { var, sampling: Sampling::OneOf(vs) } => {
                let vs: Vec<String> = vs.iter().map(|v| self.term(v)).collect();
                format!("sample {var} in {{{}}}", vs.join(", "))
            }
            CheckItem::Let { var, value } => format!("let {var} = {}", self.term(value)),
            CheckItem::Choose { var, lo, hi } => format!("choose {var} in [{}, {}]", self.term(lo), self.term(hi)),
            CheckItem::Loops { lo, hi } => format!("loops [{lo}, {hi}]"),
            CheckItem::Duration { lo, hi } => format!("duration [{}, {}]", self.term(lo), self.term(hi)),
            CheckItem::Horizon(e) => format!("horizon {}", self.term(e)),
            CheckItem::Simulate(a) => format!("simulate {{{}}}", self.program(a)),
            CheckItem::Invariant { name, formula } => format!("invariant {name}: {}", self.formula(formula)),
            CheckItem::Residual { name, term } => format!("residual {name}: {}", self.term(term)),
            CheckItem::Lie { name, term, expected } => {
                format!("lie {name}: {} = {}", self.term(term), self.term(expected))
            }
            CheckItem::Identity { name, formula } => format!("identity {name}: {}", self.formula(formula)),
            CheckItem::Abstract { name, formula, targets, names, bounds } => {
                let targets: Vec<String> = targets.iter().map(|t| self.term(t)).collect();
                let mut s = format!("abstract {name}: {} targets {}", self.formula(formula), targets.join(", "));
                if !names.is_empty() {
                    s.push_str(&format!(" as {}", join(names)));
                }
                if !bounds.is_empty() {
                    let bounds: Vec<String> = bounds.iter().map(|b| self.formula(b)).collect();
                    s.push_str(&format!(" bounds {}", bounds.join(", ")));
                }
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PENDULUM: &str = r#"
Definitions
  Real g, L, k;
  implicit Real sin(Real t), cos(Real t) '= {{sin:=0; cos:=1;}; {sin'=cos, cos'=-sin}};
End.

ProgramVariables
  Real w, theta, push;
End.

Problem
  g > 0 & L > 0 & k > 0 & theta = 0 & w = 0 ->
  [{ { push :=*; if (1/2*(w-push)^2 < g/L * cos(theta)) {w := w-push;} }
     { theta' = w, w' = -g/L * sin(theta) - k*w } }*] (-pi()/2 < theta & theta < pi()/2)
End.
"#;

    #[test]
    fn pendulum_listing() {
        let m = parse_model(PENDULUM).unwrap();
        assert_eq!(m.constants(), vec![Ident::new("g"), Ident::new("L"), Ident::new("k")]);
        assert_eq!(m.program_variables.len(), 3);
        let decl = m.implicit_decls().next().unwrap();
        assert_eq!(decl.names, vec![Ident::new("sin"), Ident::new("cos")]);
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn trivial_model() {
        let m = parse_model("Definitions End. ProgramVariables End. Problem true End.").unwrap();
        assert_eq!(m.problem, Formula::True);
    }

    #[test]
    fn undeclared_identifier() {
        let err = parse_model("Problem x > 0 End.").unwrap_err();
        assert_eq!(err, ModelError::Declaration(DeclarationError::Undeclared("x".into())));
    }

    #[test]
    fn quantified_names_need_no_declaration() {
        assert!(parse_model("Problem \\forall x x^2 >= 0 End.").is_ok());
    }

    #[test]
    fn shadowing_a_builtin_differently() {
        let text = "Definitions implicit Real exp(Real t) = {{exp:=2;}; {exp'=exp}}; End. Problem true End.";
        assert!(matches!(
            parse_model(text),
            Err(ModelError::Declaration(DeclarationError::Definition(DefinitionError::ShadowingError(_))))
        ));
    }

    #[test]
    fn abbreviations_expand() {
        let text = "Definitions Real a; Real c = 2*a; Bool P <-> c > 0; End. Problem P -> a > 0 End.";
        let m = parse_model(text).unwrap();
        assert_eq!(m.problem.to_string(), "2*a>0 -> a>0");
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn checks_block_round_trips() {
        let text = r#"
Definitions Real tau, x0; End.
ProgramVariables Real x, t; End.
Problem tau > 0 -> [{x'=-x/tau, t'=1}] x <= x0 End.
Checks
  sample tau in {0.5, 1, 2};
  sample x in [-1, 1];
  let x0 = x;
  horizon 10*tau;
  simulate {t'=1, x'=-x/tau};
  invariant decay: x^2 <= x0^2 + 0.000001;
  residual zero: x - x;
  lie d: x^2 = -2*x^2/tau;
  abstract ab: x*exp(t) <= 1 targets exp(t) as e bounds exp(t) > 0;
End.
"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.checks.as_ref().unwrap().items.len(), 9);
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }
}
