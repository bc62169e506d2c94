//! Deterministic ASCII pretty-printer. Output reparses to the same tree.

use std::fmt::Write;

use num_rational::Rational64;

use crate::definitions::registry::is_builtin_symbol;
use crate::syntax::{Formula, InterpretedSymbol, OdeSystem, Program, Term};

/// How function symbols with interpretations are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Annotations {
    /// `h<< φ >>(e)` for every interpreted symbol.
    Full,
    /// Builtin symbols print by name, everything else in full.
    #[default]
    ShortBuiltins,
    /// Every symbol prints by name (model files, where declarations resolve
    /// the names again).
    Short,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOptions {
    pub annotations: Annotations,
    /// Print ODE systems inside annotations as `{...}`.
    pub elide_ode_bodies: bool,
}

pub fn term_to_string(e: &Term) -> String {
    Printer::new(PrintOptions::default()).term_str(e)
}

pub fn formula_to_string(f: &Formula) -> String {
    Printer::new(PrintOptions::default()).formula_str(f)
}

pub fn program_to_string(a: &Program) -> String {
    Printer::new(PrintOptions::default()).program_str(a)
}

pub struct Printer {
    opts: PrintOptions,
    out: String,
    in_annotation: bool,
    known: Vec<InterpretedSymbol>,
}

impl Printer {
    pub fn new(opts: PrintOptions) -> Self {
        Printer { opts, out: String::new(), in_annotation: false, known: Vec::new() }
    }

    /// Like [`Printer::new`], additionally printing the given declared
    /// symbols by name under [`Annotations::ShortBuiltins`].
    pub fn with_known(opts: PrintOptions, known: Vec<InterpretedSymbol>) -> Self {
        Printer { known, ..Printer::new(opts) }
    }

    pub fn term_str(mut self, e: &Term) -> String {
        self.term(e, 0);
        self.out
    }

    pub fn formula_str(mut self, f: &Formula) -> String {
        self.formula(f, 0);
        self.out
    }

    pub fn program_str(mut self, a: &Program) -> String {
        self.program(a);
        self.out
    }

    /// `name<< φ >>` for an interpreted symbol, always in full.
    pub fn annotated_symbol(mut self, s: &InterpretedSymbol) -> String {
        self.symbol(s, true);
        self.out
    }

    fn term(&mut self, e: &Term, min: u8) {
        let level = term_level(e);
        let paren = level < min;
        if paren {
            self.out.push('(');
        }
        match e {
            Term::Var(x) => self.out.push_str(x.as_str()),
            Term::Const(c) => write_rational(&mut self.out, *c),
            Term::Plus(a, b) => self.binary(a, "+", b, 1),
            Term::Minus(a, b) => self.binary(a, "-", b, 1),
            Term::Times(a, b) => self.binary(a, "*", b, 2),
            Term::Divide(a, b) => self.binary(a, "/", b, 2),
            Term::Power(a, n) => {
                self.term(a, 5);
                let _ = write!(self.out, "^{n}");
            }
            Term::Negate(a) => {
                self.out.push('-');
                if matches!(**a, Term::Negate(_) | Term::Const(_)) {
                    self.out.push('(');
                    self.term(a, 0);
                    self.out.push(')');
                } else {
                    self.term(a, 3);
                }
            }
            Term::Differential(a) => {
                self.out.push('(');
                self.term(a, 0);
                self.out.push_str(")'");
            }
            Term::FuncApp(s, args) => {
                let full = match self.opts.annotations {
                    Annotations::Full => true,
                    Annotations::ShortBuiltins => !is_builtin_symbol(s) && !self.known.contains(s),
                    Annotations::Short => false,
                };
                self.symbol(s, full);
                self.out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push(',');
                    }
                    self.term(a, 0);
                }
                self.out.push(')');
            }
        }
        if paren {
            self.out.push(')');
        }
    }

    fn symbol(&mut self, s: &InterpretedSymbol, full: bool) {
        self.out.push_str(s.name.as_str());
        if let (true, Some(phi)) = (full, &s.interpretation) {
            self.out.push_str("<< ");
            let was = self.in_annotation;
            self.in_annotation = true;
            self.formula(phi, 0);
            self.in_annotation = was;
            self.out.push_str(" >>");
        }
    }

    fn binary(&mut self, a: &Term, op: &str, b: &Term, level: u8) {
        self.term(a, level);
        self.out.push_str(op);
        let signed = matches!(b, Term::Negate(_)) || matches!(b, Term::Const(c) if *c < Rational64::from_integer(0));
        self.term(b, if signed { 6 } else { level + 1 });
    }

    fn formula(&mut self, f: &Formula, min: u8) {
        let level = formula_level(f);
        let paren = level < min;
        if paren {
            self.out.push('(');
        }
        match f {
            Formula::True => self.out.push_str("true"),
            Formula::False => self.out.push_str("false"),
            Formula::Compare(op, a, b) => {
                self.term(a, 0);
                self.out.push_str(op.symbol());
                self.term(b, 0);
            }
            Formula::Not(p) => {
                self.out.push('!');
                self.formula(p, 5);
            }
            // right associative: the left operand binds one level tighter
            Formula::Equiv(a, b) => self.connective(a, " <-> ", b, 1),
            Formula::Implies(a, b) => self.connective(a, " -> ", b, 2),
            Formula::Or(a, b) => self.connective(a, "|", b, 3),
            Formula::And(a, b) => self.connective(a, "&", b, 4),
            Formula::Forall(x, p) => {
                let _ = write!(self.out, "\\forall {x} ");
                self.formula(p, 5);
            }
            Formula::Exists(x, p) => {
                let _ = write!(self.out, "\\exists {x} ");
                self.formula(p, 5);
            }
            Formula::Boxed(a, p) => {
                self.out.push('[');
                self.program(a);
                self.out.push(']');
                self.formula(p, 5);
            }
            Formula::Diamond(a, p) => {
                self.out.push('<');
                self.program(a);
                self.out.push('>');
                self.formula(p, 5);
            }
        }
        if paren {
            self.out.push(')');
        }
    }

    fn connective(&mut self, a: &Formula, op: &str, b: &Formula, level: u8) {
        self.formula(a, level + 1);
        self.out.push_str(op);
        self.formula(b, level);
    }

    fn program(&mut self, a: &Program) {
        match a {
            Program::Test(p) => {
                self.out.push('?');
                self.formula(p, 0);
                self.out.push(';');
            }
            Program::Assign(x, e) => {
                let _ = write!(self.out, "{x}:=");
                self.term(e, 0);
                self.out.push(';');
            }
            Program::AssignAny(x) => {
                let _ = write!(self.out, "{x}:=*;");
            }
            Program::Ode(ode) => self.ode(ode),
            Program::Choice(p, q) => {
                self.braced_if(p, matches!(**p, Program::Choice(..)));
                self.out.push_str("++");
                self.program(q);
            }
            Program::Sequence(p, q) => {
                self.braced_if(p, matches!(**p, Program::Sequence(..) | Program::Choice(..)));
                self.braced_if(q, matches!(**q, Program::Choice(..)));
            }
            Program::Loop(p) => {
                self.braced_if(p, true);
                self.out.push('*');
            }
            Program::IfThen(c, p) => {
                self.out.push_str("if (");
                self.formula(c, 0);
                self.out.push_str(") ");
                self.braced_if(p, true);
            }
        }
    }

    fn braced_if(&mut self, a: &Program, braces: bool) {
        if braces {
            self.out.push('{');
            self.program(a);
            self.out.push('}');
        } else {
            self.program(a);
        }
    }

    fn ode(&mut self, ode: &OdeSystem) {
        if self.in_annotation && self.opts.elide_ode_bodies {
            self.out.push_str("{...}");
            return;
        }
        self.out.push('{');
        for (i, (x, e)) in ode.equations.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            let _ = write!(self.out, "{x}'=");
            self.term(e, 0);
        }
        if ode.domain != Formula::True {
            self.out.push_str(" & ");
            self.formula(&ode.domain, 0);
        }
        self.out.push('}');
    }
}

fn term_level(e: &Term) -> u8 {
    match e {
        Term::Plus(..) | Term::Minus(..) => 1,
        Term::Times(..) | Term::Divide(..) => 2,
        Term::Const(c) if !is_decimal(*c) => 2,
        Term::Negate(_) => 3,
        Term::Const(c) if *c < Rational64::from_integer(0) => 3,
        Term::Power(..) => 4,
        _ => 5,
    }
}

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Equiv(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(_) | Formula::Forall(..) | Formula::Exists(..) | Formula::Boxed(..) | Formula::Diamond(..) => 5,
        Formula::True | Formula::False | Formula::Compare(..) => 6,
    }
}

/// Whether `c` has a terminating decimal expansion.
fn is_decimal(c: Rational64) -> bool {
    let mut d = *c.denom();
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    d == 1
}

/// Integers print plainly, terminating fractions as exact decimals, anything
/// else as a quotient of integers.
pub fn write_rational(out: &mut String, c: Rational64) {
    let (num, den) = (*c.numer() as i128, *c.denom() as i128);
    if den == 1 {
        let _ = write!(out, "{num}");
        return;
    }
    let mut d = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        let _ = write!(out, "{num}/{den}");
        return;
    }
    let digits = twos.max(fives);
    let scaled = num * 10i128.pow(digits) / den;
    let sign = if scaled < 0 { "-" } else { "" };
    let mag = scaled.unsigned_abs();
    let unit = 10u128.pow(digits);
    let _ = write!(out, "{sign}{}.{:0width$}", mag / unit, mag % unit, width = digits as usize);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::CompareOp;

    #[test]
    fn decimals_print_exactly() {
        let mut s = String::new();
        write_rational(&mut s, Rational64::new(981, 100));
        assert_eq!(s, "9.81");
        s.clear();
        write_rational(&mut s, Rational64::new(-1, 2));
        assert_eq!(s, "-0.5");
        s.clear();
        write_rational(&mut s, Rational64::new(1, 3));
        assert_eq!(s, "1/3");
    }

    #[test]
    fn precedence_parenthesizes_only_when_needed() {
        let e = (Term::var("a") + Term::var("b")) * Term::var("c");
        assert_eq!(term_to_string(&e), "(a+b)*c");
        let e = Term::var("a") - (Term::var("b") - Term::var("c"));
        assert_eq!(term_to_string(&e), "a-(b-c)");
        let e = (-Term::var("x")).pow(2);
        assert_eq!(term_to_string(&e), "(-x)^2");
        let e = -Term::var("x").pow(2);
        assert_eq!(term_to_string(&e), "-x^2");
    }

    #[test]
    fn negation_of_constants_stays_distinct() {
        assert_eq!(term_to_string(&-Term::int(1)), "-(1)");
        assert_eq!(term_to_string(&Term::int(-1)), "-1");
        assert_eq!(term_to_string(&(Term::var("a") * Term::int(-2))), "a*(-2)");
    }

    #[test]
    fn ode_with_domain() {
        let ode = OdeSystem::new(vec![("x".into(), -Term::var("x"))], Formula::cmp(CompareOp::Ge, Term::var("x"), Term::int(0)))
            .unwrap();
        assert_eq!(program_to_string(&Program::Ode(ode)), "{x'=-x & x>=0}");
    }

    #[test]
    fn connectives() {
        let p = Formula::eq(Term::var("a"), Term::int(0));
        let f = p.clone().and(p.clone().or(p.clone())).implies(p.clone());
        assert_eq!(formula_to_string(&f), "a=0&(a=0|a=0) -> a=0");
        let g = p.clone().implies(p.clone()).implies(p.clone());
        assert_eq!(formula_to_string(&g), "(a=0 -> a=0) -> a=0");
    }
}

/// Indented constructor tree, one node per line.
pub struct TreeDump {
    out: String,
}

impl TreeDump {
    pub fn term(e: &Term) -> String {
        let mut d = TreeDump { out: String::new() };
        d.t(e, 0);
        d.out
    }

    pub fn formula(f: &Formula) -> String {
        let mut d = TreeDump { out: String::new() };
        d.f(f, 0);
        d.out
    }

    pub fn program(a: &Program) -> String {
        let mut d = TreeDump { out: String::new() };
        d.p(a, 0);
        d.out
    }

    fn line(&mut self, depth: usize, s: &str) {
        let _ = writeln!(self.out, "{:width$}{s}", "", width = 2 * depth);
    }

    fn t(&mut self, e: &Term, d: usize) {
        match e {
            Term::Var(x) => self.line(d, &format!("Var {x}")),
            Term::Const(c) => {
                let mut s = String::from("Const ");
                write_rational(&mut s, *c);
                self.line(d, &s);
            }
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) | Term::Divide(a, b) => {
                let name = match e {
                    Term::Plus(..) => "Plus",
                    Term::Minus(..) => "Minus",
                    Term::Times(..) => "Times",
                    _ => "Divide",
                };
                self.line(d, name);
                self.t(a, d + 1);
                self.t(b, d + 1);
            }
            Term::Power(a, n) => {
                self.line(d, &format!("Power {n}"));
                self.t(a, d + 1);
            }
            Term::Negate(a) => {
                self.line(d, "Negate");
                self.t(a, d + 1);
            }
            Term::FuncApp(s, args) => {
                let kind = if s.interpretation.is_some() { "interpreted" } else { "uninterpreted" };
                self.line(d, &format!("FuncApp {} ({kind})", s.name));
                args.iter().for_each(|a| self.t(a, d + 1));
            }
            Term::Differential(a) => {
                self.line(d, "Differential");
                self.t(a, d + 1);
            }
        }
    }

    fn f(&mut self, f: &Formula, d: usize) {
        match f {
            Formula::True => self.line(d, "True"),
            Formula::False => self.line(d, "False"),
            Formula::Compare(op, a, b) => {
                self.line(d, &format!("Compare {}", op.symbol()));
                self.t(a, d + 1);
                self.t(b, d + 1);
            }
            Formula::Not(p) => {
                self.line(d, "Not");
                self.f(p, d + 1);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                let name = match f {
                    Formula::And(..) => "And",
                    Formula::Or(..) => "Or",
                    Formula::Implies(..) => "Implies",
                    _ => "Equiv",
                };
                self.line(d, name);
                self.f(a, d + 1);
                self.f(b, d + 1);
            }
            Formula::Forall(x, p) | Formula::Exists(x, p) => {
                let q = if matches!(f, Formula::Forall(..)) { "Forall" } else { "Exists" };
                self.line(d, &format!("{q} {x}"));
                self.f(p, d + 1);
            }
            Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
                self.line(d, if matches!(f, Formula::Boxed(..)) { "Box" } else { "Diamond" });
                self.p(a, d + 1);
                self.f(p, d + 1);
            }
        }
    }

    fn p(&mut self, prog: &Program, d: usize) {
        match prog {
            Program::Test(f) => {
                self.line(d, "Test");
                self.f(f, d + 1);
            }
            Program::Assign(x, e) => {
                self.line(d, &format!("Assign {x}"));
                self.t(e, d + 1);
            }
            Program::AssignAny(x) => self.line(d, &format!("AssignAny {x}")),
            Program::Ode(ode) => {
                self.line(d, "Ode");
                for (x, e) in &ode.equations {
                    self.line(d + 1, &format!("{x}'"));
                    self.t(e, d + 2);
                }
                if ode.domain != Formula::True {
                    self.line(d + 1, "domain");
                    self.f(&ode.domain, d + 2);
                }
            }
            Program::Choice(a, b) | Program::Sequence(a, b) => {
                self.line(d, if matches!(prog, Program::Choice(..)) { "Choice" } else { "Sequence" });
                self.p(a, d + 1);
                self.p(b, d + 1);
            }
            Program::Loop(a) => {
                self.line(d, "Loop");
                self.p(a, d + 1);
            }
            Program::IfThen(c, body) => {
                self.line(d, "IfThen");
                self.f(c, d + 1);
                self.p(body, d + 1);
            }
        }
    }
}
