use std::collections::BTreeSet;

use indexmap::IndexMap;
use num_rational::Rational64;

use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;
use crate::definitions::registry::builtin_symbol;
use crate::syntax::{CompareOp, Formula, Ident, InterpretedSymbol, OdeSystem, Program, Term};

pub(crate) type PResult<T> = Result<T, SyntaxError>;

/// Names the parser resolves: declared function symbols and abbreviations.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub functions: IndexMap<Ident, InterpretedSymbol>,
    pub terms: IndexMap<Ident, Term>,
    pub formulas: IndexMap<Ident, Formula>,
    pub programs: IndexMap<Ident, Program>,
}

impl SymbolTable {
    /// Resolves an application of `name` without annotation.
    fn function(&self, name: &str, arity: usize) -> Result<InterpretedSymbol, String> {
        let found = self.functions.get(name).or_else(|| builtin_symbol(name));
        match found {
            Some(s) if s.arity == arity => Ok(s.clone()),
            Some(s) => Err(format!("{name} expects {} argument(s), got {arity}", s.arity)),
            None => Ok(InterpretedSymbol::uninterpreted(name, arity)),
        }
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub table: SymbolTable,
    furthest: usize,
    expected: BTreeSet<String>,
}

const COMPARISONS: [(&str, CompareOp); 6] = [
    ("=", CompareOp::Eq),
    ("!=", CompareOp::Ne),
    (">=", CompareOp::Ge),
    (">", CompareOp::Gt),
    ("<=", CompareOp::Le),
    ("<", CompareOp::Lt),
];

impl Parser {
    pub fn new(text: &str, table: SymbolTable) -> PResult<Self> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, table, furthest: 0, expected: BTreeSet::new() })
    }

    // ---- token plumbing ----

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn note_expected(&mut self, what: &str) {
        if self.pos > self.furthest {
            self.furthest = self.pos;
            self.expected.clear();
        }
        if self.pos == self.furthest {
            self.expected.insert(what.to_string());
        }
    }

    /// Whether the last consumed token is the symbol `s`.
    pub(crate) fn after_sym(&self, s: &str) -> bool {
        self.pos > 0 && matches!(&self.toks[self.pos - 1].tok, Tok::Sym(t) if *t == s)
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            self.note_expected(s);
            false
        }
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {s}")))
        }
    }

    pub(crate) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            self.note_expected(kw);
            false
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {kw}")))
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Ident::from(name))
            }
            _ => {
                self.note_expected("identifier");
                Err(self.error("expected identifier"))
            }
        }
    }

    pub(crate) fn number(&mut self) -> PResult<Rational64> {
        match self.peek().clone() {
            Tok::Number(lit) => {
                let v = decimal(&lit).ok_or_else(|| self.error_here(&format!("numeral {lit} out of range")))?;
                self.bump();
                Ok(v)
            }
            _ => {
                self.note_expected("number");
                Err(self.error("expected number"))
            }
        }
    }

    /// Error at the furthest position reached, listing what was expected there.
    pub(crate) fn error(&self, message: &str) -> SyntaxError {
        let at = self.furthest.max(self.pos);
        let tok = &self.toks[at];
        let expected = if at == self.furthest { self.expected.iter().cloned().collect() } else { Vec::new() };
        let found = match &tok.tok {
            Tok::Ident(s) | Tok::Number(s) => format!("found {s}"),
            Tok::Sym(s) => format!("found {s}"),
            Tok::Eof => "found end of input".to_string(),
        };
        let message = if at == self.pos { format!("{message}, {found}") } else { format!("unexpected token, {found}") };
        SyntaxError::new(tok.line, tok.col, &message, expected)
    }

    /// Error at the current token, without an expected set.
    pub(crate) fn error_here(&self, message: &str) -> SyntaxError {
        let tok = &self.toks[self.pos];
        SyntaxError::new(tok.line, tok.col, message, Vec::new())
    }

    pub fn finish(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.note_expected("end of input");
            Err(self.error("trailing input"))
        }
    }

    // ---- terms ----

    pub fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_sym("+") {
                lhs = Term::Plus(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat_sym("-") {
                lhs = Term::Minus(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym("*") {
                lhs = Term::Times(Box::new(lhs), Box::new(self.unary()?));
            } else if self.at_sym("/") {
                let at = self.pos;
                self.bump();
                let den = self.unary()?;
                lhs = lhs.checked_div(den).map_err(|e| {
                    let tok = &self.toks[at];
                    SyntaxError::new(tok.line, tok.col, &e.to_string(), Vec::new())
                })?;
            } else {
                self.note_expected("/");
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat_sym("-") {
            // a numeral directly after the sign is a negative constant
            if matches!(self.peek(), Tok::Number(_)) && !matches!(self.peek_at(1), Tok::Sym("^")) {
                return Ok(Term::Const(-self.number()?));
            }
            return Ok(Term::Negate(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Term> {
        let mut base = self.primary()?;
        while self.eat_sym("^") {
            let n = self.number()?;
            if !n.is_integer() || *n.numer() < 0 || *n.numer() > u32::MAX as i64 {
                return Err(self.error_here("exponent must be a natural number"));
            }
            base = Term::Power(Box::new(base), *n.numer() as u32);
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(Term::Const(self.number()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.term()?;
                self.expect_sym(")")?;
                if self.eat_sym("'") {
                    Ok(Term::Differential(Box::new(e)))
                } else {
                    Ok(e)
                }
            }
            Tok::Ident(name) if !is_reserved(&name) => {
                let at = self.pos;
                self.bump();
                if self.at_sym("<<") {
                    self.bump();
                    let phi = self.formula()?;
                    self.expect_sym(">>")?;
                    let args = self.arguments()?;
                    return InterpretedSymbol::interpreted(name.as_str(), args.len(), phi)
                        .map(|s| Term::FuncApp(s, args))
                        .map_err(|e| self.error_at(at, &e.to_string()));
                }
                if self.at_sym("(") {
                    let args = self.arguments()?;
                    let symbol = self.table.function(&name, args.len()).map_err(|m| self.error_at(at, &m))?;
                    return Ok(Term::FuncApp(symbol, args));
                }
                if let Some(e) = self.table.terms.get(name.as_str()) {
                    return Ok(e.clone());
                }
                Ok(Term::Var(Ident::from(name)))
            }
            _ => {
                for what in ["number", "identifier", "(", "-"] {
                    self.note_expected(what);
                }
                Err(self.error("expected a term"))
            }
        }
    }

    fn error_at(&self, at: usize, message: &str) -> SyntaxError {
        let tok = &self.toks[at];
        SyntaxError::new(tok.line, tok.col, message, Vec::new())
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.implication()?;
        if self.eat_sym("<->") {
            return Ok(lhs.equiv(self.formula()?));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            return Ok(lhs.implies(self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let lhs = self.conjunction()?;
        if self.eat_sym("|") {
            return Ok(lhs.or(self.disjunction()?));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let lhs = self.unary_formula()?;
        if self.eat_sym("&") {
            return Ok(lhs.and(self.conjunction()?));
        }
        Ok(lhs)
    }

    fn unary_formula(&mut self) -> PResult<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::Not(Box::new(self.unary_formula()?)));
        }
        if self.eat_sym("\\forall") {
            let x = self.ident()?;
            return Ok(Formula::Forall(x, Box::new(self.unary_formula()?)));
        }
        if self.eat_sym("\\exists") {
            let x = self.ident()?;
            return Ok(Formula::Exists(x, Box::new(self.unary_formula()?)));
        }
        if self.eat_sym("[") {
            let a = self.program()?;
            self.expect_sym("]")?;
            return Ok(Formula::boxed(a, self.unary_formula()?));
        }
        if self.eat_sym("<") {
            let a = self.program()?;
            self.expect_sym(">")?;
            return Ok(Formula::diamond(a, self.unary_formula()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        if let Tok::Ident(name) = self.peek().clone() {
            let followed_by_term_op = matches!(
                self.peek_at(1),
                Tok::Sym("(" | "<<" | "+" | "-" | "*" | "/" | "^" | "=" | "!=" | ">=" | ">" | "<=" | "<")
            );
            if !followed_by_term_op {
                match name.as_str() {
                    "true" => {
                        self.bump();
                        return Ok(Formula::True);
                    }
                    "false" => {
                        self.bump();
                        return Ok(Formula::False);
                    }
                    _ => {}
                }
                if let Some(f) = self.table.formulas.get(name.as_str()) {
                    let f = f.clone();
                    self.bump();
                    return Ok(f);
                }
            }
        }
        if self.at_sym("(") {
            let start = self.pos;
            match self.comparison() {
                Ok(f) => return Ok(f),
                Err(_) => {
                    self.pos = start;
                    self.bump();
                    let f = self.formula()?;
                    self.expect_sym(")")?;
                    return Ok(f);
                }
            }
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        for (sym, op) in COMPARISONS {
            if self.eat_sym(sym) {
                return Ok(Formula::Compare(op, lhs, self.term()?));
            }
        }
        Err(self.error("expected a comparison"))
    }

    // ---- programs ----

    pub fn program(&mut self) -> PResult<Program> {
        let lhs = self.sequence()?;
        if self.eat_sym("++") {
            return Ok(lhs.choice(self.program()?));
        }
        Ok(lhs)
    }

    fn sequence(&mut self) -> PResult<Program> {
        let mut parts = vec![self.statement()?];
        while self.starts_statement() {
            parts.push(self.statement()?);
        }
        Ok(Program::sequence(parts).expect("at least one statement"))
    }

    fn starts_statement(&mut self) -> bool {
        match self.peek() {
            Tok::Sym("?" | "{") => true,
            Tok::Ident(name) => {
                (name == "if" && matches!(self.peek_at(1), Tok::Sym("(")))
                    || matches!(self.peek_at(1), Tok::Sym(":="))
                    || self.table.programs.contains_key(name.as_str())
            }
            _ => {
                for what in ["?", "{", "identifier", "if"] {
                    self.note_expected(what);
                }
                false
            }
        }
    }

    fn statement(&mut self) -> PResult<Program> {
        if self.eat_sym("?") {
            let f = self.formula()?;
            self.eat_sym(";");
            return Ok(Program::Test(f));
        }
        if self.eat_sym("{") {
            let inner = if self.at_ode_start() { Program::Ode(self.ode_body()?) } else { self.program()? };
            self.expect_sym("}")?;
            let stmt = if self.eat_sym("*") { inner.repeat() } else { inner };
            self.eat_sym(";");
            return Ok(stmt);
        }
        if self.at_keyword("if") && matches!(self.peek_at(1), Tok::Sym("(")) {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.formula()?;
            self.expect_sym(")")?;
            self.expect_sym("{")?;
            let body = self.program()?;
            self.expect_sym("}")?;
            self.eat_sym(";");
            return Ok(Program::IfThen(cond, Box::new(body)));
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if !matches!(self.peek_at(1), Tok::Sym(":=")) {
                if let Some(a) = self.table.programs.get(name.as_str()) {
                    let a = a.clone();
                    self.bump();
                    self.eat_sym(";");
                    return Ok(a);
                }
            }
        }
        let x = self.ident()?;
        self.expect_sym(":=")?;
        let stmt = if self.eat_sym("*") { Program::AssignAny(x) } else { Program::Assign(x, self.term()?) };
        self.eat_sym(";");
        Ok(stmt)
    }

    fn at_ode_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && matches!(self.peek_at(1), Tok::Sym("'"))
            && matches!(self.peek_at(2), Tok::Sym("="))
    }

    /// `x'=f, y'=g & Q` without the surrounding braces.
    pub(crate) fn ode_body(&mut self) -> PResult<OdeSystem> {
        let mut equations = Vec::new();
        loop {
            let x = self.ident()?;
            self.expect_sym("'")?;
            self.expect_sym("=")?;
            equations.push((x, self.term()?));
            if !self.eat_sym(",") {
                break;
            }
        }
        let domain = if self.eat_sym("&") { self.formula()? } else { Formula::True };
        let at = self.pos;
        OdeSystem::new(equations, domain).map_err(|e| self.error_at(at, &e.to_string()))
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "true" | "false")
}

/// Exact value of a decimal numeral.
fn decimal(lit: &str) -> Option<Rational64> {
    let (int, frac) = lit.split_once('.').unwrap_or((lit, ""));
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    Some(Rational64::new(num, den))
}
