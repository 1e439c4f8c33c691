//! Syntax tree of session scripts and its canonical rendering.
//!
//! Rendering is the inverse of parsing: `parse(render(s)) == s`.

use std::fmt;

use num_bigint::BigInt;

/// Polynomial expressions over tower generators, bound elements and integer
/// index variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Name(String),
    Indexed(String, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fold {
        op: FoldOp,
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
        body: Box<Expr>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldOp {
    Sum,
    Prod,
}

impl FoldOp {
    pub fn keyword(self) -> &'static str {
        match self {
            FoldOp::Sum => "sum",
            FoldOp::Prod => "prod",
        }
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// `true` for expressions that render without needing parentheses as an argument.
    pub fn is_atom(&self) -> bool {
        self.precedence() == 5 && !matches!(self, Expr::Num(n) if n.sign() == num_bigint::Sign::Minus)
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Name(s) => write!(f, "{s}"),
            Expr::Indexed(s, i) => write!(f, "{s}[{i}]"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, 4)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 3)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 5)
            }
            Expr::Fold { op, var, lo, hi, body } => {
                write!(f, "{}({var}={lo}..{hi}, {body})", op.keyword())
            }
        }
    }
}

/// Writes an expression used as a command argument, parenthesized unless atomic.
pub struct Arg<'a>(pub &'a Expr);

impl fmt::Display for Arg<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atom() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

/// Left-hand side of a rule: a named generator or a family member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Named(String),
    /// `X[k]` for a fixed `k`.
    Literal(String, u32),
    /// `X[a*i + b]` for every `i >= 0`.
    Affine { family: String, var: String, a: i64, b: i64 },
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Named(s) => write!(f, "{s}"),
            Pattern::Literal(s, k) => write!(f, "{s}[{k}]"),
            Pattern::Affine { family, var, a, b } => {
                write!(f, "{family}[")?;
                if *a != 1 {
                    write!(f, "{a}*")?;
                }
                write!(f, "{var}")?;
                match b.cmp(&0) {
                    std::cmp::Ordering::Greater => write!(f, " + {b}")?,
                    std::cmp::Ordering::Less => write!(f, " - {}", -b)?,
                    std::cmp::Ordering::Equal => {}
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub pattern: Pattern,
    pub body: Expr,
}

fn write_rules(f: &mut fmt::Formatter<'_>, rules: &[Rule]) -> fmt::Result {
    write!(f, "{{ ")?;
    for (k, r) in rules.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{} -> {}", r.pattern, r.body)?;
    }
    write!(f, " }}")
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    write!(f, "[")?;
    for (k, it) in items.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{it}")?;
    }
    write!(f, "]")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerSpec {
    Adic {
        vars: Vec<String>,
        ideal: Vec<Expr>,
        rels: Vec<Expr>,
    },
    Cutoff {
        family: String,
        center: Expr,
        extra: usize,
    },
    Discrete {
        vars: Vec<String>,
        rels: Vec<Expr>,
    },
    Dual {
        vars: Vec<String>,
        rels: Vec<Expr>,
        delta: Vec<Rule>,
        family: String,
        bound: usize,
    },
    Quotient {
        base: String,
        ideal: Vec<Expr>,
    },
    Tensor(String, String),
    Localize {
        base: String,
        f: Expr,
    },
    /// The tower a derivation lives on.
    Of(String),
}

impl fmt::Display for TowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerSpec::Adic { vars, ideal, rels } => {
                write!(f, "adic vars=")?;
                write_list(f, vars)?;
                write!(f, " ideal=")?;
                write_list(f, ideal)?;
                if !rels.is_empty() {
                    write!(f, " rels=")?;
                    write_list(f, rels)?;
                }
                Ok(())
            }
            TowerSpec::Cutoff { family, center, extra } => {
                write!(f, "cutoff family={family} centers={}", Arg(center))?;
                if *extra != 0 {
                    write!(f, " extra={extra}")?;
                }
                Ok(())
            }
            TowerSpec::Discrete { vars, rels } => {
                write!(f, "discrete vars=")?;
                write_list(f, vars)?;
                if !rels.is_empty() {
                    write!(f, " rels=")?;
                    write_list(f, rels)?;
                }
                Ok(())
            }
            TowerSpec::Dual {
                vars,
                rels,
                delta,
                family,
                bound,
            } => {
                write!(f, "dual vars=")?;
                write_list(f, vars)?;
                if !rels.is_empty() {
                    write!(f, " rels=")?;
                    write_list(f, rels)?;
                }
                write!(f, " exhaust=deg family={family} bound={bound} delta ")?;
                write_rules(f, delta)
            }
            TowerSpec::Quotient { base, ideal } => {
                write!(f, "quotient {base} ideal=")?;
                write_list(f, ideal)
            }
            TowerSpec::Tensor(a, b) => write!(f, "tensor {a} {b}"),
            TowerSpec::Localize { base, f: e } => write!(f, "localize {base} f={}", Arg(e)),
            TowerSpec::Of(d) => write!(f, "of {d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivationSpec {
    Rules { rules: Vec<Rule>, shift: Option<usize> },
    /// The derivation dual to the ring derivation of a dual-coordinate tower.
    Dual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformSpec {
    Scale(Expr),
    Sum(String),
    Quotient(Vec<Expr>),
    Localize(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definition {
    Tower(TowerSpec),
    Elem { tower: String, expr: Expr },
    Der { tower: String, spec: DerivationSpec },
    Map { tower: String, rules: Vec<Rule> },
    Derive { der: String, transform: TransformSpec },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    CheckIntegrable {
        der: String,
        level: Option<usize>,
        power: Option<usize>,
        expect: Option<String>,
    },
    Exp {
        der: String,
        elem: Expr,
        level: Option<usize>,
    },
    VerifyCoaction {
        target: String,
        samples: Option<usize>,
        level: Option<usize>,
        expect: Option<String>,
    },
    Flow {
        der: String,
        t: Expr,
        elem: Expr,
        level: Option<usize>,
    },
    FlowLaw {
        der: String,
        samples: Option<usize>,
        level: Option<usize>,
    },
    Invariants {
        der: String,
        level: Option<usize>,
        deg: Option<u32>,
    },
    Invariant {
        der: String,
        elem: Expr,
        level: Option<usize>,
        expect: Option<String>,
    },
    Slice {
        der: String,
        candidates: Vec<Expr>,
        level: Option<usize>,
        expect: Option<String>,
    },
    Reynolds {
        der: String,
        slice: Expr,
        elem: Expr,
        level: Option<usize>,
    },
    Cylinder {
        der: String,
        slice: Expr,
        elem: Expr,
        level: Option<usize>,
    },
    Localize {
        tower: String,
        f: Expr,
        level: Option<usize>,
        expect: Option<String>,
    },
    Metric {
        a: Expr,
        b: Expr,
        depth: Option<usize>,
    },
    Higher {
        der: String,
        elem: Expr,
        order: usize,
        level: Option<usize>,
    },
    Orbit {
        der: String,
        f: Expr,
        t: Expr,
        at: Vec<Expr>,
    },
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::CheckIntegrable { .. } => "check-integrable",
            Command::Exp { .. } => "exp",
            Command::VerifyCoaction { .. } => "verify-coaction",
            Command::Flow { .. } => "flow",
            Command::FlowLaw { .. } => "flow-law",
            Command::Invariants { .. } => "invariants",
            Command::Invariant { .. } => "invariant",
            Command::Slice { .. } => "slice",
            Command::Reynolds { .. } => "reynolds",
            Command::Cylinder { .. } => "cylinder",
            Command::Localize { .. } => "localize",
            Command::Metric { .. } => "metric",
            Command::Higher { .. } => "higher",
            Command::Orbit { .. } => "orbit",
        }
    }
}

fn opt<T: fmt::Display>(f: &mut fmt::Formatter<'_>, key: &str, v: &Option<T>) -> fmt::Result {
    match v {
        Some(v) => write!(f, " {key} {v}"),
        None => Ok(()),
    }
}

fn expect(f: &mut fmt::Formatter<'_>, v: &Option<String>) -> fmt::Result {
    match v {
        Some(v) => write!(f, " expect={v}"),
        None => Ok(()),
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.keyword())?;
        match self {
            Command::CheckIntegrable { der, level, power, expect: e } => {
                write!(f, " {der}")?;
                opt(f, "level", level)?;
                opt(f, "power", power)?;
                expect(f, e)
            }
            Command::Exp { der, elem, level } => {
                write!(f, " {der} {}", Arg(elem))?;
                opt(f, "level", level)
            }
            Command::VerifyCoaction { target, samples, level, expect: e } => {
                write!(f, " {target}")?;
                opt(f, "samples", samples)?;
                opt(f, "level", level)?;
                expect(f, e)
            }
            Command::Flow { der, t, elem, level } => {
                write!(f, " {der} t={} {}", Arg(t), Arg(elem))?;
                opt(f, "level", level)
            }
            Command::FlowLaw { der, samples, level } => {
                write!(f, " {der}")?;
                opt(f, "samples", samples)?;
                opt(f, "level", level)
            }
            Command::Invariants { der, level, deg } => {
                write!(f, " {der}")?;
                opt(f, "level", level)?;
                opt(f, "deg", deg)
            }
            Command::Invariant { der, elem, level, expect: e } => {
                write!(f, " {der} {}", Arg(elem))?;
                opt(f, "level", level)?;
                expect(f, e)
            }
            Command::Slice { der, candidates, level, expect: e } => {
                write!(f, " {der} candidates=")?;
                write_list(f, candidates)?;
                opt(f, "level", level)?;
                expect(f, e)
            }
            Command::Reynolds { der, slice, elem, level } | Command::Cylinder { der, slice, elem, level } => {
                write!(f, " {der} slice={} {}", Arg(slice), Arg(elem))?;
                opt(f, "level", level)
            }
            Command::Localize { tower, f: e, level, expect: x } => {
                write!(f, " {tower} f={}", Arg(e))?;
                opt(f, "level", level)?;
                expect(f, x)
            }
            Command::Metric { a, b, depth } => {
                write!(f, " {} {}", Arg(a), Arg(b))?;
                opt(f, "depth", depth)
            }
            Command::Higher { der, elem, order, level } => {
                write!(f, " {der} {} {order}", Arg(elem))?;
                opt(f, "level", level)
            }
            Command::Orbit { der, f: e, t, at } => {
                write!(f, " {der} f={} t={} at=", Arg(e), Arg(t))?;
                write_list(f, at)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Let { name: String, def: Definition },
    Command(Command),
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Let { name, def } => {
                write!(f, "let {name} = ")?;
                match def {
                    Definition::Tower(spec) => write!(f, "tower {spec}"),
                    Definition::Elem { tower, expr } => write!(f, "elem {tower} {expr}"),
                    Definition::Der { tower, spec } => {
                        write!(f, "der {tower} ")?;
                        match spec {
                            DerivationSpec::Rules { rules, shift } => {
                                write_rules(f, rules)?;
                                opt(f, "shift", shift)
                            }
                            DerivationSpec::Dual => write!(f, "dual"),
                        }
                    }
                    Definition::Map { tower, rules } => {
                        write!(f, "map {tower} ")?;
                        write_rules(f, rules)
                    }
                    Definition::Derive { der, transform } => {
                        write!(f, "derive {der} ")?;
                        match transform {
                            TransformSpec::Scale(e) => write!(f, "scale={}", Arg(e)),
                            TransformSpec::Sum(d) => write!(f, "sum={d}"),
                            TransformSpec::Quotient(gens) => {
                                write!(f, "quotient=")?;
                                write_list(f, gens)
                            }
                            TransformSpec::Localize(e) => write!(f, "localize={}", Arg(e)),
                        }
                    }
                }
            }
            Statement::Command(c) => write!(f, "{c}"),
        }
    }
}

/// A parsed script: statements in order, with their source lines.
#[derive(Clone, Debug, Default)]
pub struct SessionScript {
    pub statements: Vec<Statement>,
    /// 1-based source line of each statement.
    pub lines: Vec<usize>,
}

impl PartialEq for SessionScript {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl Eq for SessionScript {}

impl fmt::Display for SessionScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
