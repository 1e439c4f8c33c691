//! Line-oriented parser for session scripts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::ast::*;
use crate::error::SessionError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
    /// No whitespace separates this token from the previous one.
    glued: bool,
}

const SYMBOLS: &[&str] = &["->", "..", "=", "[", "]", "{", "}", "(", ")", ",", "+", "-", "*", "/", "^"];

fn lex(line: &str, lineno: usize) -> Result<Vec<Token>, SessionError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut glued = false;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            glued = false;
            i += 1;
            continue;
        }
        let col = i + 1;
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Num(s.parse().expect("digits")),
                col,
                glued,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-' && is_keyword_dash(&chars, start, i)) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
                glued,
            });
        } else {
            let rest: String = chars[i..].iter().take(2).collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| SessionError::parse(lineno, col, format!("unexpected character '{c}'")))?;
            i += sym.len();
            out.push(Token {
                tok: Tok::Sym(sym),
                col,
                glued,
            });
        }
        glued = true;
    }
    Ok(out)
}

// Hyphenated command keywords are lexed as one identifier at line start.
fn is_keyword_dash(chars: &[char], start: usize, i: usize) -> bool {
    if chars[..start].iter().any(|c| !c.is_whitespace()) {
        return false;
    }
    let word: String = chars[start..i].iter().collect();
    matches!(word.as_str(), "check" | "verify" | "flow") && chars.get(i + 1).is_some_and(|c| c.is_alphabetic())
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

type PResult<T> = Result<T, SessionError>;

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(SessionError::parse(self.line, self.col(), msg))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, usize)> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, col))
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_ident(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{kw}'"))
        }
    }

    fn number(&mut self, what: &str) -> PResult<usize> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let v = n.to_usize();
                match v {
                    Some(v) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    None => self.err(format!("{what} is too large")),
                }
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary (('*' | '/' | juxtaposition) unary)*
    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym("*") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_sym("/") {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(lhs, Expr::Num(_)) && self.juxtaposed() {
                // `2i`, `3x`, `2(x + 1)`
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn juxtaposed(&self) -> bool {
        let Some(t) = self.toks.get(self.pos) else {
            return false;
        };
        t.glued && matches!(&t.tok, Tok::Ident(_) | Tok::Sym("("))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.atom()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if (name == "sum" || name == "prod") && self.is_sym("(") {
                    self.pos += 1;
                    let (var, _) = self.ident("a summation variable")?;
                    self.expect_sym("=")?;
                    let lo = self.expr()?;
                    self.expect_sym("..")?;
                    let hi = self.expr()?;
                    self.expect_sym(",")?;
                    let body = self.expr()?;
                    self.expect_sym(")")?;
                    let op = if name == "sum" { FoldOp::Sum } else { FoldOp::Prod };
                    return Ok(Expr::Fold {
                        op,
                        var,
                        lo: Box::new(lo),
                        hi: Box::new(hi),
                        body: Box::new(body),
                    });
                }
                if self.is_sym("[") && self.toks[self.pos].glued {
                    self.pos += 1;
                    let idx = self.expr()?;
                    self.expect_sym("]")?;
                    return Ok(Expr::Indexed(name, Box::new(idx)));
                }
                Ok(Expr::Name(name))
            }
            _ => self.err("expected an expression"),
        }
    }

    /// A command argument: an atom, or a negated atom.
    fn arg(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.arg()?)));
        }
        self.atom()
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect_sym("[")?;
        let mut out = Vec::new();
        if self.eat_sym("]") {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym("]") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn names(&mut self) -> PResult<Vec<String>> {
        self.list(|c| c.ident("a variable name").map(|(s, _)| s))
    }

    fn exprs(&mut self) -> PResult<Vec<Expr>> {
        self.list(|c| c.expr())
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let (name, _) = self.ident("a generator")?;
        if !self.eat_sym("[") {
            return Ok(Pattern::Named(name));
        }
        let col = self.col();
        let idx = self.expr()?;
        self.expect_sym("]")?;
        match affine(&idx) {
            Some((None, 0, b)) if b >= 0 => Ok(Pattern::Literal(name, b as u32)),
            Some((Some(var), a, b)) if a > 0 => Ok(Pattern::Affine { family: name, var, a, b }),
            _ => Err(SessionError::parse(
                self.line,
                col,
                "index pattern must be a constant or a*i + b with a > 0",
            )),
        }
    }

    fn rules(&mut self) -> PResult<Vec<Rule>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            let pattern = self.pattern()?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            out.push(Rule { pattern, body });
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    /// `key=` prefix.
    fn is_key(&self, key: &str) -> bool {
        self.is_ident(key) && matches!(self.peek_at(1), Some(Tok::Sym("=")))
    }

    fn key(&mut self, key: &str) -> PResult<()> {
        if self.is_key(key) {
            self.pos += 2;
            Ok(())
        } else {
            self.err(format!("expected '{key}='"))
        }
    }
}

// Reads `a*i + b` (or a constant) from an index expression.
fn affine(e: &Expr) -> Option<(Option<String>, i64, i64)> {
    fn go(e: &Expr) -> Option<(Option<String>, i64, i64)> {
        match e {
            Expr::Num(n) => Some((None, 0, n.to_i64()?)),
            Expr::Name(v) => Some((Some(v.clone()), 1, 0)),
            Expr::Neg(x) => {
                let (v, a, b) = go(x)?;
                Some((v, -a, -b))
            }
            Expr::Add(x, y) | Expr::Sub(x, y) => {
                let (v1, a1, b1) = go(x)?;
                let (v2, a2, b2) = go(y)?;
                let s = if matches!(e, Expr::Sub(..)) { -1 } else { 1 };
                let v = match (v1, v2) {
                    (Some(p), Some(q)) if p != q => return None,
                    (p, q) => p.or(q),
                };
                Some((v, a1 + s * a2, b1 + s * b2))
            }
            Expr::Mul(x, y) => {
                let (v1, a1, b1) = go(x)?;
                let (v2, a2, b2) = go(y)?;
                match (&v1, &v2) {
                    (Some(_), Some(_)) => None,
                    (None, _) => Some((v2, b1 * a2, b1 * b2)),
                    (_, None) => Some((v1, a1 * b2, b1 * b2)),
                }
            }
            _ => None,
        }
    }
    let (v, a, b) = go(e)?;
    if a == 0 {
        Some((None, 0, b))
    } else {
        Some((v, a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Tower,
    Elem,
    Der,
    Map,
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::Tower => "tower",
            Kind::Elem => "element",
            Kind::Der => "derivation",
            Kind::Map => "map",
        }
    }
}

struct Scope {
    names: HashMap<String, Kind>,
}

impl Scope {
    fn require(&self, name: &str, kinds: &[Kind], line: usize, col: usize) -> PResult<()> {
        match self.names.get(name) {
            Some(k) if kinds.contains(k) => Ok(()),
            Some(k) => Err(SessionError::name(
                line,
                col,
                name,
                format!("'{name}' is a {}, expected a {}", k.noun(), kinds[0].noun()),
            )),
            None => Err(SessionError::name(line, col, name, format!("'{name}' is not defined"))),
        }
    }
}

fn parse_statement(c: &mut Cursor<'_>, scope: &mut Scope) -> PResult<Statement> {
    let line = c.line;
    if c.is_ident("let") {
        c.pos += 1;
        let (name, _) = c.ident("a binding name")?;
        c.expect_sym("=")?;
        let (what, col) = c.ident("tower, elem, der, map or derive")?;
        let (def, kind) = match what.as_str() {
            "tower" => (Definition::Tower(parse_tower(c, scope)?), Kind::Tower),
            "elem" => {
                let (tower, col) = c.ident("a tower name")?;
                scope.require(&tower, &[Kind::Tower], line, col)?;
                let expr = c.expr()?;
                (Definition::Elem { tower, expr }, Kind::Elem)
            }
            "der" => {
                let (tower, col) = c.ident("a tower name")?;
                scope.require(&tower, &[Kind::Tower], line, col)?;
                let spec = if c.is_ident("dual") {
                    c.pos += 1;
                    DerivationSpec::Dual
                } else {
                    let rules = c.rules()?;
                    let shift = if c.is_ident("shift") {
                        c.pos += 1;
                        Some(c.number("a shift")?)
                    } else {
                        None
                    };
                    DerivationSpec::Rules { rules, shift }
                };
                (Definition::Der { tower, spec }, Kind::Der)
            }
            "map" => {
                let (tower, col) = c.ident("a tower name")?;
                scope.require(&tower, &[Kind::Tower], line, col)?;
                (Definition::Map { tower, rules: c.rules()? }, Kind::Map)
            }
            "derive" => {
                let (der, col) = c.ident("a derivation name")?;
                scope.require(&der, &[Kind::Der], line, col)?;
                let transform = if c.is_key("scale") {
                    c.key("scale")?;
                    TransformSpec::Scale(c.arg()?)
                } else if c.is_key("sum") {
                    c.key("sum")?;
                    let (other, col) = c.ident("a derivation name")?;
                    scope.require(&other, &[Kind::Der], line, col)?;
                    TransformSpec::Sum(other)
                } else if c.is_key("quotient") {
                    c.key("quotient")?;
                    TransformSpec::Quotient(c.exprs()?)
                } else if c.is_key("localize") {
                    c.key("localize")?;
                    TransformSpec::Localize(c.arg()?)
                } else {
                    return c.err("unknown transform: expected scale=, sum=, quotient= or localize=");
                };
                (Definition::Derive { der, transform }, Kind::Der)
            }
            _ => {
                return Err(SessionError::parse(line, col, format!("unknown definition kind '{what}'")));
            }
        };
        c.finish()?;
        scope.names.insert(name.clone(), kind);
        return Ok(Statement::Let { name, def });
    }
    let cmd = parse_command(c, scope)?;
    c.finish()?;
    Ok(Statement::Command(cmd))
}

fn parse_tower(c: &mut Cursor<'_>, scope: &Scope) -> PResult<TowerSpec> {
    let line = c.line;
    let (kind, col) = c.ident("a tower kind")?;
    let spec = match kind.as_str() {
        "adic" => {
            c.key("vars")?;
            let vars = c.names()?;
            c.key("ideal")?;
            let ideal = c.exprs()?;
            let rels = if c.is_key("rels") {
                c.key("rels")?;
                c.exprs()?
            } else {
                Vec::new()
            };
            TowerSpec::Adic { vars, ideal, rels }
        }
        "cutoff" => {
            c.key("family")?;
            let (family, _) = c.ident("a family name")?;
            c.key("centers")?;
            let center = c.arg()?;
            let extra = if c.is_key("extra") {
                c.key("extra")?;
                c.number("an extra count")?
            } else {
                0
            };
            TowerSpec::Cutoff { family, center, extra }
        }
        "discrete" => {
            c.key("vars")?;
            let vars = c.names()?;
            let rels = if c.is_key("rels") {
                c.key("rels")?;
                c.exprs()?
            } else {
                Vec::new()
            };
            TowerSpec::Discrete { vars, rels }
        }
        "dual" => {
            c.key("vars")?;
            let vars = c.names()?;
            let mut rels = Vec::new();
            let mut family = "X".to_string();
            let mut bound = 64;
            loop {
                if c.is_key("rels") {
                    c.key("rels")?;
                    rels = c.exprs()?;
                } else if c.is_key("exhaust") {
                    c.key("exhaust")?;
                    let (e, col) = c.ident("an exhaustion")?;
                    if e != "deg" {
                        return Err(SessionError::parse(line, col, format!("unknown exhaustion '{e}'")));
                    }
                } else if c.is_key("family") {
                    c.key("family")?;
                    family = c.ident("a family name")?.0;
                } else if c.is_key("bound") {
                    c.key("bound")?;
                    bound = c.number("a bound")?;
                } else {
                    break;
                }
            }
            c.keyword("delta")?;
            let delta = c.rules()?;
            TowerSpec::Dual {
                vars,
                rels,
                delta,
                family,
                bound,
            }
        }
        "quotient" => {
            let (base, col) = c.ident("a tower name")?;
            scope.require(&base, &[Kind::Tower], line, col)?;
            c.key("ideal")?;
            TowerSpec::Quotient { base, ideal: c.exprs()? }
        }
        "tensor" => {
            let (a, col) = c.ident("a tower name")?;
            scope.require(&a, &[Kind::Tower], line, col)?;
            let (b, col) = c.ident("a tower name")?;
            scope.require(&b, &[Kind::Tower], line, col)?;
            TowerSpec::Tensor(a, b)
        }
        "localize" => {
            let (base, col) = c.ident("a tower name")?;
            scope.require(&base, &[Kind::Tower], line, col)?;
            c.key("f")?;
            TowerSpec::Localize { base, f: c.arg()? }
        }
        "of" => {
            let (d, col) = c.ident("a derivation name")?;
            scope.require(&d, &[Kind::Der], line, col)?;
            TowerSpec::Of(d)
        }
        _ => return Err(SessionError::parse(line, col, format!("unknown tower kind '{kind}'"))),
    };
    Ok(spec)
}

#[derive(Default)]
struct Opts {
    level: Option<usize>,
    power: Option<usize>,
    samples: Option<usize>,
    deg: Option<u32>,
    depth: Option<usize>,
    expect: Option<String>,
}

fn parse_opts(c: &mut Cursor<'_>, allowed: &[&str], expects: &[&str]) -> PResult<Opts> {
    let mut o = Opts::default();
    while !c.at_end() {
        let col = c.col();
        if c.is_key("expect") {
            c.key("expect")?;
            let (v, vcol) = c.ident("an expectation")?;
            if !expects.contains(&v.as_str()) {
                return Err(SessionError::parse(
                    c.line,
                    vcol,
                    format!("expect must be one of {}", expects.join(", ")),
                ));
            }
            o.expect = Some(v);
            continue;
        }
        let (k, _) = c.ident("an option")?;
        if !allowed.contains(&k.as_str()) {
            return Err(SessionError::parse(c.line, col, format!("unknown option '{k}'")));
        }
        let v = c.number(&format!("a value for '{k}'"))?;
        match k.as_str() {
            "level" => o.level = Some(v),
            "power" => o.power = Some(v),
            "samples" => o.samples = Some(v),
            "deg" => o.deg = Some(v as u32),
            "depth" => o.depth = Some(v),
            _ => unreachable!("option list and match agree"),
        }
    }
    Ok(o)
}

fn parse_command(c: &mut Cursor<'_>, scope: &Scope) -> PResult<Command> {
    let line = c.line;
    let (kw, col) = c.ident("a command")?;
    let der = |c: &mut Cursor<'_>, kinds: &[Kind]| -> PResult<String> {
        let (d, col) = c.ident("a derivation name")?;
        scope.require(&d, kinds, line, col)?;
        Ok(d)
    };
    let cmd = match kw.as_str() {
        "check-integrable" => {
            let der = der(c, &[Kind::Der])?;
            let o = parse_opts(c, &["level", "power"], &["certified", "refuted", "inconclusive"])?;
            Command::CheckIntegrable {
                der,
                level: o.level,
                power: o.power,
                expect: o.expect,
            }
        }
        "exp" => {
            let der = der(c, &[Kind::Der])?;
            let elem = c.arg()?;
            let o = parse_opts(c, &["level"], &[])?;
            Command::Exp { der, elem, level: o.level }
        }
        "verify-coaction" => {
            let target = der(c, &[Kind::Der, Kind::Map])?;
            let o = parse_opts(c, &["samples", "level"], &["pass", "fail"])?;
            Command::VerifyCoaction {
                target,
                samples: o.samples,
                level: o.level,
                expect: o.expect,
            }
        }
        "flow" => {
            let der = der(c, &[Kind::Der])?;
            c.key("t")?;
            let t = c.arg()?;
            let elem = c.arg()?;
            let o = parse_opts(c, &["level"], &[])?;
            Command::Flow {
                der,
                t,
                elem,
                level: o.level,
            }
        }
        "flow-law" => {
            let der = der(c, &[Kind::Der])?;
            let o = parse_opts(c, &["samples", "level"], &[])?;
            Command::FlowLaw {
                der,
                samples: o.samples,
                level: o.level,
            }
        }
        "invariants" => {
            let der = der(c, &[Kind::Der])?;
            let o = parse_opts(c, &["level", "deg"], &[])?;
            Command::Invariants {
                der,
                level: o.level,
                deg: o.deg,
            }
        }
        "invariant" => {
            let der = der(c, &[Kind::Der])?;
            let elem = c.arg()?;
            let o = parse_opts(c, &["level"], &["true", "false"])?;
            Command::Invariant {
                der,
                elem,
                level: o.level,
                expect: o.expect,
            }
        }
        "slice" => {
            let der = der(c, &[Kind::Der])?;
            c.key("candidates")?;
            let candidates = c.exprs()?;
            let o = parse_opts(c, &["level"], &["found", "none"])?;
            Command::Slice {
                der,
                candidates,
                level: o.level,
                expect: o.expect,
            }
        }
        "reynolds" | "cylinder" => {
            let der = der(c, &[Kind::Der])?;
            c.key("slice")?;
            let slice = c.arg()?;
            let elem = c.arg()?;
            let o = parse_opts(c, &["level"], &[])?;
            if kw == "reynolds" {
                Command::Reynolds {
                    der,
                    slice,
                    elem,
                    level: o.level,
                }
            } else {
                Command::Cylinder {
                    der,
                    slice,
                    elem,
                    level: o.level,
                }
            }
        }
        "localize" => {
            let (tower, tcol) = c.ident("a tower name")?;
            scope.require(&tower, &[Kind::Tower], line, tcol)?;
            c.key("f")?;
            let f = c.arg()?;
            let o = parse_opts(c, &["level"], &["zero", "nonzero"])?;
            Command::Localize {
                tower,
                f,
                level: o.level,
                expect: o.expect,
            }
        }
        "metric" => {
            let a = c.arg()?;
            let b = c.arg()?;
            let depth = if matches!(c.peek(), Some(Tok::Num(_))) {
                Some(c.number("a depth")?)
            } else {
                parse_opts(c, &["depth"], &[])?.depth
            };
            Command::Metric { a, b, depth }
        }
        "higher" => {
            let der = der(c, &[Kind::Der])?;
            let elem = c.arg()?;
            let order = c.number("an order")?;
            let o = parse_opts(c, &["level"], &[])?;
            Command::Higher {
                der,
                elem,
                order,
                level: o.level,
            }
        }
        "orbit" => {
            let der = der(c, &[Kind::Der])?;
            c.key("f")?;
            let f = c.arg()?;
            c.key("t")?;
            let t = c.arg()?;
            c.key("at")?;
            let at = c.exprs()?;
            Command::Orbit { der, f, t, at }
        }
        _ => return Err(SessionError::parse(line, col, format!("unknown command '{kw}'"))),
    };
    Ok(cmd)
}

/// Parses every line independently; a line that fails does not bind its name.
pub fn parse_lines(text: &str) -> Vec<(usize, Result<Statement, SessionError>)> {
    let mut out = Vec::new();
    let mut scope = Scope { names: HashMap::new() };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks = match lex(raw, line) {
            Ok(t) => t,
            Err(e) => {
                out.push((line, Err(e)));
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
            line,
            end_col: raw.chars().count() + 1,
        };
        out.push((line, parse_statement(&mut c, &mut scope)));
    }
    out
}

/// Parses a whole script, checking that every binding is defined before use.
pub fn parse_session(text: &str) -> Result<SessionScript, SessionError> {
    let mut script = SessionScript::default();
    for (line, stmt) in parse_lines(text) {
        script.statements.push(stmt?);
        script.lines.push(line);
    }
    Ok(script)
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, SessionError> {
    let toks = lex(text, 1)?;
    let mut c = Cursor {
        toks: &toks,
        pos: 0,
        line: 1,
        end_col: text.chars().count() + 1,
    };
    let e = c.expr()?;
    c.finish()?;
    Ok(e)
}
