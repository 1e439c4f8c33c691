//! Statement-by-statement execution of session scripts.

use std::collections::HashMap;
use std::time::Instant;

use indiga_core::derivation::Transform;
use indiga_core::series::Evaluation;
use indiga_core::tower::Exhaustion;
use indiga_core::{
    dual_derivation, element_compare, find_local_slice, is_zero_localization, verify_coaction, Centers, Derivation,
    DerivationConfig, GroebnerLimits, IntegrabilityVerdict, LevelCoaction, Poly, Rational, RestrictedExponential,
    SliceData, SubstitutionCoaction, TowerElement, TowerRing, Universe, VarId, Window,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::ast::*;
use crate::error::SessionError;
use crate::eval::{self, RingScope, TowerScope};
use crate::parse::parse_lines;
use crate::report::{Outcome, Record, Report};

/// Defaults for options a statement leaves unset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub depth: usize,
    pub power: usize,
    pub deg: u32,
    pub groebner_cap: usize,
    pub seed: u64,
    pub fail_fast: bool,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            depth: 6,
            power: 12,
            deg: 4,
            groebner_cap: 100_000,
            seed: 0,
            fail_fast: false,
            timings: false,
        }
    }
}

const DEFAULT_SAMPLES: usize = 20;
const SAMPLE_TERMS: usize = 4;

#[derive(Clone)]
enum Binding {
    Tower { tower: TowerRing, dual: Option<Derivation> },
    Elem(TowerElement),
    Der(Derivation),
    Map(SubstitutionCoaction),
}

impl Binding {
    fn noun(&self) -> &'static str {
        match self {
            Binding::Tower { .. } => "tower",
            Binding::Elem(_) => "element",
            Binding::Der(_) => "derivation",
            Binding::Map(_) => "map",
        }
    }
}

/// What a statement produced: report fields, a one-line summary, and whether
/// its checks passed.
struct Done {
    data: Map<String, Value>,
    summary: String,
    passed: bool,
}

impl Done {
    fn ok(data: Map<String, Value>, summary: impl Into<String>) -> Self {
        Done {
            data,
            summary: summary.into(),
            passed: true,
        }
    }

    fn check(data: Map<String, Value>, summary: impl Into<String>, passed: bool) -> Self {
        Done {
            data,
            summary: summary.into(),
            passed,
        }
    }
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json! object literal"),
    }
}

type SResult<T> = Result<T, SessionError>;

/// Interpreter state for one script.
pub struct Session<'a> {
    config: RunConfig,
    source: Vec<&'a str>,
    line: usize,
    env: HashMap<String, Binding>,
    exps: HashMap<(String, usize, usize), RestrictedExponential>,
    rng: ChaCha8Rng,
}

/// Parses and runs `text`, capturing every error as a failed record.
pub fn run_script(name: &str, text: &str, config: &RunConfig) -> Report {
    let mut session = Session {
        config: config.clone(),
        source: text.lines().collect(),
        line: 0,
        env: HashMap::new(),
        exps: HashMap::new(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    let mut records = Vec::new();
    for (index, (line, parsed)) in parse_lines(text).into_iter().enumerate() {
        session.line = line;
        let raw = session.source[line - 1].trim().to_string();
        let start = Instant::now();
        let record = match parsed {
            Err(e) => Record::error(index, line, raw, "parse", None, &e),
            Ok(stmt) => {
                let (kind, bound) = match &stmt {
                    Statement::Let { name, def } => (definition_kind(def), Some(name.clone())),
                    Statement::Command(c) => (c.keyword(), None),
                };
                let source = stmt.to_string();
                match session.statement(&stmt) {
                    Ok(done) => Record {
                        index,
                        line,
                        source,
                        kind: kind.to_string(),
                        name: bound,
                        outcome: if done.passed { Outcome::Ok } else { Outcome::Failed },
                        summary: done.summary,
                        data: done.data,
                        error: None,
                        elapsed_ms: None,
                    },
                    Err(e) => Record::error(index, line, source, kind, bound, &e),
                }
            }
        };
        let mut record = record;
        if config.timings {
            record.elapsed_ms = Some(start.elapsed().as_millis() as u64);
        }
        let failed = record.outcome != Outcome::Ok;
        records.push(record);
        if failed && config.fail_fast {
            break;
        }
    }
    Report {
        name: name.to_string(),
        config: config.clone(),
        records,
    }
}

fn definition_kind(def: &Definition) -> &'static str {
    match def {
        Definition::Tower(_) => "tower",
        Definition::Elem { .. } => "elem",
        Definition::Der { .. } => "der",
        Definition::Map { .. } => "map",
        Definition::Derive { .. } => "derive",
    }
}

fn rational_json(q: &Rational) -> Value {
    Value::String(q.to_string())
}

fn eval_err(e: String) -> SessionError {
    SessionError::eval(e)
}

impl Session<'_> {
    fn statement(&mut self, stmt: &Statement) -> SResult<Done> {
        match stmt {
            Statement::Let { name, def } => {
                let (binding, done) = self.define(def)?;
                self.env.insert(name.clone(), binding);
                Ok(done)
            }
            Statement::Command(c) => self.command(c),
        }
    }

    fn limits(&self) -> GroebnerLimits {
        GroebnerLimits {
            max_pairs: self.config.groebner_cap,
            max_reductions: self.config.groebner_cap,
        }
    }

    fn der_config(&self) -> DerivationConfig {
        DerivationConfig {
            audit_depth: self.config.depth,
            ..DerivationConfig::default()
        }
    }

    fn lookup(&self, name: &str) -> SResult<&Binding> {
        self.env.get(name).ok_or_else(|| {
            SessionError::name(
                self.line,
                self.column_of(name),
                name,
                format!("'{name}' is not bound (its definition failed)"),
            )
        })
    }

    fn tower(&self, name: &str) -> SResult<TowerRing> {
        match self.lookup(name)? {
            Binding::Tower { tower, .. } => Ok(tower.clone()),
            b => Err(self.wrong_kind(name, b, "tower")),
        }
    }

    fn derivation(&self, name: &str) -> SResult<Derivation> {
        match self.lookup(name)? {
            Binding::Der(d) => Ok(d.clone()),
            b => Err(self.wrong_kind(name, b, "derivation")),
        }
    }

    fn wrong_kind(&self, name: &str, b: &Binding, want: &str) -> SessionError {
        SessionError::name(
            self.line,
            self.column_of(name),
            name,
            format!("'{name}' is a {}, expected a {want}", b.noun()),
        )
    }

    /// 1-based column of the first whole-word occurrence of `name` on the current line.
    fn column_of(&self, name: &str) -> usize {
        let text = self.source.get(self.line.wrapping_sub(1)).copied().unwrap_or("");
        let is_word = |c: char| c.is_alphanumeric() || c == '_';
        let mut from = 0;
        while let Some(k) = text[from..].find(name) {
            let at = from + k;
            let before = text[..at].chars().next_back();
            let after = text[at + name.len()..].chars().next();
            if !before.is_some_and(is_word) && !after.is_some_and(is_word) {
                return text[..at].chars().count() + 1;
            }
            from = at + name.len();
        }
        1
    }

    fn elements(&self) -> HashMap<String, TowerElement> {
        self.env
            .iter()
            .filter_map(|(k, b)| match b {
                Binding::Elem(e) => Some((k.clone(), e.clone())),
                _ => None,
            })
            .collect()
    }

    /// Raises a NameError for the first identifier `expr` cannot resolve in `tower`.
    fn check_names(&self, expr: &Expr, tower: &TowerRing, extra: Option<&str>) -> SResult<()> {
        fn walk<'e>(e: &'e Expr, bound: &mut Vec<&'e str>, out: &mut Vec<(&'e str, bool)>) {
            match e {
                Expr::Num(_) => {}
                Expr::Name(n) => {
                    if !bound.contains(&n.as_str()) {
                        out.push((n, false));
                    }
                }
                Expr::Indexed(f, i) => {
                    out.push((f, true));
                    walk(i, bound, out);
                }
                Expr::Neg(a) => walk(a, bound, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Expr::Fold { var, lo, hi, body, .. } => {
                    walk(lo, bound, out);
                    walk(hi, bound, out);
                    bound.push(var);
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut names = Vec::new();
        walk(expr, &mut Vec::new(), &mut names);
        for (name, indexed) in names {
            let known = if indexed {
                tower.has_generator(&VarId::indexed(name, 0))
            } else {
                extra == Some(name)
                    || name == "n"
                    || matches!(self.env.get(name), Some(Binding::Elem(_)))
                    || tower.has_generator(&VarId::named(name))
            };
            if !known {
                return Err(SessionError::name(
                    self.line,
                    self.column_of(name),
                    name,
                    format!("'{name}' is neither a bound element nor a generator of the tower"),
                ));
            }
        }
        Ok(())
    }

    /// `expr` as an element of `tower`, with names checked and level `first` evaluated eagerly.
    fn element_in(&self, tower: &TowerRing, expr: &Expr) -> SResult<TowerElement> {
        if let Expr::Name(n) = expr {
            if let Some(Binding::Elem(e)) = self.env.get(n) {
                if e.tower().same(tower) {
                    return Ok(e.clone());
                }
            }
        }
        self.check_names(expr, tower, None)?;
        let e = eval::element(tower, &self.elements(), expr, Vec::new());
        e.at(tower.first_level())?;
        Ok(e)
    }

    /// A constant expression: no names but bound integers.
    fn rational(&self, expr: &Expr) -> SResult<Option<Rational>> {
        let scope = RingScope { vars: &[], extra: None };
        match eval::eval(expr, &scope, &mut Vec::new()) {
            Ok(s) => Ok(s.constant_value()),
            Err(_) => Ok(None),
        }
    }

    fn exponential(&mut self, der_name: &str, level: usize) -> SResult<RestrictedExponential> {
        let window = Window {
            max_level: level.max(self.config.depth),
            max_power: self.config.power,
        };
        let key = (der_name.to_string(), window.max_level, window.max_power);
        if let Some(e) = self.exps.get(&key) {
            return Ok(e.clone());
        }
        let d = self.derivation(der_name)?;
        let e = RestrictedExponential::certify(&d, window)?;
        self.exps.insert(key, e.clone());
        Ok(e)
    }

    fn samples(&mut self, tower: &TowerRing, count: usize, level: usize) -> SResult<Vec<TowerElement>> {
        let first = tower.first_level();
        let mut out: Vec<TowerElement> = tower
            .level(first.max(1).min(level.max(first)))?
            .universe()
            .vars()
            .iter()
            .take(count.min(3))
            .map(|v| TowerElement::generator(tower, v))
            .collect();
        while out.len() < count {
            let deg = self.config.deg;
            out.push(tower.random_element(&mut self.rng, level, deg, SAMPLE_TERMS)?);
        }
        Ok(out)
    }

    fn render_levels(&self, e: &TowerElement, from: usize, to: usize) -> SResult<Vec<Value>> {
        let mut out = Vec::new();
        for n in from..=to {
            out.push(json!({"level": n, "value": e.render_at(n)?}));
        }
        Ok(out)
    }

    fn define(&mut self, def: &Definition) -> SResult<(Binding, Done)> {
        match def {
            Definition::Tower(spec) => self.define_tower(spec),
            Definition::Elem { tower, expr } => {
                let t = self.tower(tower)?;
                let e = self.element_in(&t, expr)?;
                let depth = self.config.depth;
                let value = e.render_at(depth)?;
                let data = obj(json!({"level": depth, "value": value}));
                let summary = format!("{value} (mod level {depth})");
                Ok((Binding::Elem(e), Done::ok(data, summary)))
            }
            Definition::Der { tower, spec } => {
                let t = self.tower(tower)?;
                let d = match spec {
                    DerivationSpec::Dual => match self.lookup(tower)? {
                        Binding::Tower { dual: Some(d), .. } => d.clone(),
                        _ => {
                            return Err(SessionError::eval(format!(
                                "'{tower}' is not a dual-coordinate tower"
                            )))
                        }
                    },
                    DerivationSpec::Rules { rules, shift } => {
                        for r in rules {
                            let probe = match &r.pattern {
                                Pattern::Named(v) => VarId::named(v),
                                Pattern::Literal(f, k) => VarId::indexed(f, *k),
                                Pattern::Affine { family, .. } => VarId::indexed(family, 0),
                            };
                            if !t.has_generator(&probe) {
                                return Err(SessionError::name(
                                    self.line,
                                    self.column_of(&r.pattern.to_string()),
                                    &r.pattern.to_string(),
                                    format!("{} is not a generator of '{tower}'", r.pattern),
                                ));
                            }
                            self.check_names(&r.body, &t, pattern_var(&r.pattern))?;
                        }
                        let (rules, elements, t2) = (rules.clone(), self.elements(), t.clone());
                        Derivation::new(
                            &t,
                            move |v| match eval::match_rule(&rules, v) {
                                Some((body, ints)) => Ok(eval::element(&t2, &elements, body, ints)),
                                None => Err(indiga_core::Error::Presentation(format!("no rule for generator {v}"))),
                            },
                            *shift,
                            self.der_config(),
                        )?
                    }
                };
                let data = obj(json!({"shift": d.shift(), "tower": d.tower().describe()}));
                let summary = format!("shift {}", d.shift());
                Ok((Binding::Der(d), Done::ok(data, summary)))
            }
            Definition::Map { tower, rules } => {
                let t = self.tower(tower)?;
                for r in rules {
                    self.check_names(&r.body, &t, Some("T"))?;
                }
                let (rules, elements, t2) = (rules.clone(), self.elements(), t.clone());
                let param = VarId::named("T");
                let map = SubstitutionCoaction::from_fn(&t, move |v, n| {
                    let Some((body, mut ints)) = eval::match_rule(&rules, v) else {
                        return Ok(None);
                    };
                    let scope = TowerScope {
                        tower: &t2,
                        elements: &elements,
                        level: n,
                        extra: Some("T"),
                    };
                    let s = eval::eval(body, &scope, &mut ints).map_err(indiga_core::Error::Presentation)?;
                    let mut terms = Vec::new();
                    for (i, c) in s.split_by(&param) {
                        terms.push((i, c.to_poly().map_err(indiga_core::Error::Presentation)?));
                    }
                    Ok(Some(terms))
                });
                let data = obj(json!({"tower": t.describe()}));
                Ok((Binding::Map(map), Done::ok(data, "substitution map")))
            }
            Definition::Derive { der, transform } => {
                let d = self.derivation(der)?;
                let t = d.tower().clone();
                let depth = self.config.depth;
                let (mode, gens) = match transform {
                    TransformSpec::Scale(e) => (Transform::ScaleByInvariant(self.element_in(&t, e)?), Vec::new()),
                    TransformSpec::Sum(other) => (Transform::SumCommuting(self.derivation(other)?), Vec::new()),
                    TransformSpec::Quotient(es) => {
                        let gens = es.iter().map(|e| self.element_in(&t, e)).collect::<SResult<Vec<_>>>()?;
                        (Transform::Quotient(gens.clone()), gens)
                    }
                    TransformSpec::Localize(e) => (Transform::Localize(self.element_in(&t, e)?), Vec::new()),
                };
                let derived = d.derive_transform(&mode, depth)?;
                let mut data = obj(json!({
                    "mode": mode.mode(),
                    "shift": derived.shift(),
                    "tower": derived.tower().describe(),
                }));
                if !gens.is_empty() {
                    let q = derived.tower().clone();
                    let mut witnesses = Vec::new();
                    for g in &gens {
                        let dg = d.apply(g);
                        let reduced = q.lift(&dg.at(depth)?, depth)?;
                        witnesses.push(json!({
                            "generator": g.render_at(depth)?,
                            "image": dg.render_at(depth)?,
                            "reduced": q.level(depth)?.render(&reduced),
                            "level": depth,
                        }));
                    }
                    data.insert("membership".into(), Value::Array(witnesses));
                }
                let summary = format!("{} (shift {})", mode.mode(), derived.shift());
                Ok((Binding::Der(derived), Done::ok(data, summary)))
            }
        }
    }

    fn ring_universe(&self, vars: &[String]) -> SResult<std::sync::Arc<Universe>> {
        Ok(Universe::new(vars.iter().map(|v| VarId::named(v)).collect())?)
    }

    fn ring_polys(&self, u: &std::sync::Arc<Universe>, exprs: &[Expr]) -> SResult<Vec<Poly>> {
        exprs
            .iter()
            .map(|e| {
                eval::ring_poly(u, e, None).map_err(|m| {
                    if m.starts_with("unknown name") {
                        let name = m.split('\'').nth(1).unwrap_or("").to_string();
                        SessionError::name(self.line, self.column_of(&name), &name, m)
                    } else {
                        eval_err(m)
                    }
                })
            })
            .collect()
    }

    fn define_tower(&mut self, spec: &TowerSpec) -> SResult<(Binding, Done)> {
        let mut dual = None;
        let tower = match spec {
            TowerSpec::Adic { vars, ideal, rels } => {
                let u = self.ring_universe(vars)?;
                let ideal = self.ring_polys(&u, ideal)?;
                let rels = self.ring_polys(&u, rels)?;
                let ids: Vec<VarId> = u.vars().to_vec();
                TowerRing::adic(&ids, &rels, &ideal)?.with_limits(self.limits())
            }
            TowerSpec::Cutoff { family, center, extra } => {
                let centers = match self.rational(center)? {
                    Some(c) => Centers::constant(c),
                    None => {
                        let expr = center.clone();
                        let scope_check = RingScope { vars: &[], extra: None };
                        eval::eval(&expr, &scope_check, &mut vec![("i".into(), BigInt::zero())])
                            .map_err(eval_err)?
                            .constant_value()
                            .ok_or_else(|| eval_err("centers must be constants in i".into()))?;
                        Centers::from_fn(&expr.to_string(), move |i| {
                            let scope = RingScope { vars: &[], extra: None };
                            eval::eval(&expr, &scope, &mut vec![("i".into(), BigInt::from(i))])
                                .ok()
                                .and_then(|s| s.constant_value())
                                .unwrap_or_else(Rational::zero)
                        })
                    }
                };
                TowerRing::cutoff(family, centers, *extra).with_limits(self.limits())
            }
            TowerSpec::Discrete { vars, rels } => {
                let u = self.ring_universe(vars)?;
                let rels = self.ring_polys(&u, rels)?;
                TowerRing::discrete(u.vars(), &rels)?.with_limits(self.limits())
            }
            TowerSpec::Dual {
                vars,
                rels,
                delta,
                family,
                bound,
            } => {
                let u = self.ring_universe(vars)?;
                let rels = self.ring_polys(&u, rels)?;
                let mut images = Vec::new();
                for v in u.vars() {
                    let (body, _) = eval::match_rule(delta, v)
                        .ok_or_else(|| eval_err(format!("delta has no rule for {v}")))?;
                    images.push(self.ring_polys(&u, std::slice::from_ref(body))?.remove(0));
                }
                let (t, d) = dual_derivation(&u, &rels, Some(images), Exhaustion::Degree, *bound, family)?;
                dual = Some(d);
                t
            }
            TowerSpec::Quotient { base, ideal } => {
                let b = self.tower(base)?;
                let gens = ideal.iter().map(|e| self.element_in(&b, e)).collect::<SResult<Vec<_>>>()?;
                TowerRing::quotient(&b, &gens)?
            }
            TowerSpec::Tensor(a, b) => TowerRing::tensor(&self.tower(a)?, &self.tower(b)?)?,
            TowerSpec::Localize { base, f } => {
                let b = self.tower(base)?;
                let f = self.element_in(&b, f)?;
                TowerRing::localize(&b, &f)?
            }
            TowerSpec::Of(d) => self.derivation(d)?.tower().clone(),
        };
        let depth = self.config.depth;
        tower.audit_transitions(depth)?;
        tower.audit_surjectivity(depth)?;
        let mut levels = Vec::new();
        for n in 0..=depth {
            let level = tower.level(n)?;
            levels.push(json!({
                "level": n,
                "generators": level.universe().len(),
                "ideal": level.ideal().render(),
            }));
        }
        let data = obj(json!({
            "tower": tower.describe(),
            "kind": tower.kind_name(),
            "first_level": tower.first_level(),
            "well_formed_to": depth,
            "levels": levels,
        }));
        let summary = format!("{} tower, well-formed to level {depth}", tower.kind_name());
        Ok((Binding::Tower { tower, dual }, Done::ok(data, summary)))
    }

    fn command(&mut self, c: &Command) -> SResult<Done> {
        let depth = self.config.depth;
        match c {
            Command::CheckIntegrable { der, level, power, expect } => {
                let d = self.derivation(der)?;
                let window = Window {
                    max_level: level.unwrap_or(depth),
                    max_power: power.unwrap_or(self.config.power),
                };
                let verdict = d.check_integrable(window)?;
                let mut data = obj(json!({
                    "status": verdict.status(),
                    "window": {"level": window.max_level, "power": window.max_power},
                    "shift": d.shift(),
                }));
                let summary = match &verdict {
                    IntegrabilityVerdict::Certified { orders, .. } => {
                        let orders: Vec<Value> =
                            orders.iter().map(|o| json!({"level": o.level, "order": o.order})).collect();
                        data.insert("orders".into(), Value::Array(orders));
                        "certified".to_string()
                    }
                    IntegrabilityVerdict::Refuted { level, family, .. } => {
                        let fam: Vec<Value> = family
                            .iter()
                            .map(|w| {
                                json!({
                                    "generator": w.generator.to_string(),
                                    "ideal_level": w.ideal_level,
                                    "power": w.power,
                                    "level": w.level,
                                    "image": w.image.to_string(),
                                })
                            })
                            .collect();
                        let first = &family[0];
                        data.insert(
                            "witness".into(),
                            json!({"generator": first.generator.to_string(), "power": first.power, "level": first.level}),
                        );
                        data.insert("escape_level".into(), json!(level));
                        data.insert("family".into(), Value::Array(fam));
                        format!(
                            "refuted: ∂^{}({}) = {} survives at level {}",
                            first.power, first.generator, first.image, first.level
                        )
                    }
                    IntegrabilityVerdict::Inconclusive { reason, .. } => {
                        data.insert("reason".into(), json!(reason));
                        format!("inconclusive: {reason}")
                    }
                };
                let passed = expect.as_deref().is_none_or(|x| x == verdict.status());
                Ok(Done::check(data, summary, passed))
            }
            Command::Exp { der, elem, level } => {
                let level = level.unwrap_or(depth);
                let e = self.exponential(der, level)?;
                let b = self.element_in(e.derivation().tower(), elem)?;
                let series = e.exp_series(&b)?;
                let first = e.derivation().tower().first_level();
                let mut levels = Vec::new();
                for n in first..=level {
                    let s = series.at(n)?;
                    let l = e.derivation().tower().level(n)?;
                    let coefficients: Vec<Value> = (0..=s.t_degree().unwrap_or(0))
                        .map(|i| Value::String(l.render(&s.coefficient(&[i]))))
                        .collect();
                    levels.push(json!({"level": n, "series": series.render_at(n)?, "coefficients": coefficients}));
                }
                let summary = series.render_at(level)?;
                Ok(Done::ok(obj(json!({"levels": levels})), summary))
            }
            Command::VerifyCoaction { target, samples, level, expect } => {
                let level = level.unwrap_or(depth.min(5));
                let count = samples.unwrap_or(DEFAULT_SAMPLES);
                let coaction: Box<dyn LevelCoaction> = match self.lookup(target)?.clone() {
                    Binding::Map(m) => Box::new(m),
                    Binding::Der(_) => Box::new(self.exponential(target, level)?),
                    b => return Err(self.wrong_kind(target, &b, "derivation")),
                };
                let tower = coaction.tower().clone();
                let sample_elems = self.samples(&tower, count, level)?;
                let report = verify_coaction(coaction.as_ref(), &sample_elems, level)?;
                let mut data = obj(json!({
                    "passed": report.passed,
                    "checks": report.checks,
                    "samples": count,
                    "level": level,
                }));
                let summary = match &report.violation {
                    None => format!("counit and coassociativity hold on {count} samples to level {level}"),
                    Some(v) => {
                        data.insert(
                            "violation".into(),
                            json!({
                                "law": v.law,
                                "sample": sample_elems[v.sample].render_at(v.level)?,
                                "sample_index": v.sample,
                                "level": v.level,
                                "index": v.index,
                                "difference": v.rendered,
                            }),
                        );
                        let at = v.index.iter().enumerate().map(|(k, e)| {
                            let p = if k == 0 { "T" } else { "T'" };
                            format!("{p}^{e}")
                        });
                        format!(
                            "{} fails at level {}: coefficient of {} differs by {}",
                            v.law,
                            v.level,
                            at.collect::<Vec<_>>().join("*"),
                            v.rendered
                        )
                    }
                };
                let want = expect.as_deref() != Some("fail");
                Ok(Done::check(data, summary, report.passed == want))
            }
            Command::Flow { der, t, elem, level } => {
                let level = level.unwrap_or(depth);
                let e = self.exponential(der, level)?;
                let tower = e.derivation().tower().clone();
                let t = self.evaluation(&tower, t)?;
                let b = self.element_in(&tower, elem)?;
                let moved = e.flow(&t, &b, level)?;
                let levels = self.render_levels(&moved, tower.first_level(), level)?;
                let summary = format!("{} (mod level {level})", moved.render_at(level)?);
                Ok(Done::ok(obj(json!({"levels": levels})), summary))
            }
            Command::FlowLaw { der, samples, level } => {
                let level = level.unwrap_or(depth);
                let count = samples.unwrap_or(DEFAULT_SAMPLES);
                let e = self.exponential(der, level)?;
                let tower = e.derivation().tower().clone();
                let elems = self.samples(&tower, count, level)?;
                let mut failure = None;
                for b in &elems {
                    let t1 = self.small_rational();
                    let t2 = self.small_rational();
                    let (p1, p2, p12) = (
                        Evaluation::Rational(t1.clone()),
                        Evaluation::Rational(t2.clone()),
                        Evaluation::Rational(&t1 + &t2),
                    );
                    let lhs = e.flow(&p1, &e.flow(&p2, b, level)?, level)?;
                    let rhs = e.flow(&p12, b, level)?;
                    let one = Evaluation::Rational(Rational::one());
                    let minus = Evaluation::Rational(-Rational::one());
                    let back = e.flow(&one, &e.flow(&minus, b, level)?, level)?;
                    let c1 = element_compare(&lhs, &rhs, level)?;
                    let c2 = element_compare(&back, b, level)?;
                    if !c1.equal_to_depth || !c2.equal_to_depth {
                        failure = Some(json!({
                            "sample": b.render_at(level)?,
                            "t": t1.to_string(),
                            "t_prime": t2.to_string(),
                            "group_law": c1.equal_to_depth,
                            "inverse": c2.equal_to_depth,
                        }));
                        break;
                    }
                }
                let passed = failure.is_none();
                let mut data = obj(json!({"passed": passed, "samples": count, "level": level}));
                if let Some(f) = failure {
                    data.insert("failure".into(), f);
                }
                let summary = if passed {
                    format!("flow(t)∘flow(t') = flow(t+t') and flow(1)∘flow(-1) = id on {count} samples")
                } else {
                    "flow law violated".to_string()
                };
                Ok(Done::check(data, summary, passed))
            }
            Command::Invariants { der, level, deg } => {
                let d = self.derivation(der)?;
                let level = level.unwrap_or(depth);
                let deg = deg.unwrap_or(self.config.deg);
                let basis = d.kernel_basis(level, deg)?;
                let l = d.tower().level(level)?;
                let rendered: Vec<String> = basis.iter().map(|p| l.render(p)).collect();
                let summary = format!("kernel basis [{}]", rendered.join(", "));
                Ok(Done::ok(
                    obj(json!({"level": level, "deg": deg, "basis": rendered})),
                    summary,
                ))
            }
            Command::Invariant { der, elem, level, expect } => {
                let level = level.unwrap_or(depth);
                let e = self.exponential(der, level)?;
                let b = self.element_in(e.derivation().tower(), elem)?;
                let outcome = e.invariant_test(&b, level)?;
                let data = obj(json!({
                    "invariant": outcome.invariant,
                    "first_failure": outcome.first_failure,
                    "level": level,
                }));
                let summary = match outcome.first_failure {
                    None => format!("invariant to level {level}"),
                    Some(n) => format!("not invariant: e(b) ≠ b at level {n}"),
                };
                let passed = match expect.as_deref() {
                    Some("true") => outcome.invariant,
                    Some("false") => !outcome.invariant,
                    _ => true,
                };
                Ok(Done::check(data, summary, passed))
            }
            Command::Slice { der, candidates, level, expect } => {
                let level = level.unwrap_or(depth);
                let e = self.exponential(der, level)?;
                let tower = e.derivation().tower().clone();
                let cands = candidates
                    .iter()
                    .map(|c| self.element_in(&tower, c))
                    .collect::<SResult<Vec<_>>>()?;
                let found = find_local_slice(&e, &cands, level)?;
                let (data, summary) = match &found {
                    None => (obj(json!({"found": false, "level": level})), "no local slice among candidates".to_string()),
                    Some(s) => (
                        obj(json!({
                            "found": true,
                            "level": level,
                            "slice": s.slice.render_at(level)?,
                            "derivative": s.s1.render_at(level)?,
                            "sigma": s.sigma.render_at(level)?,
                        })),
                        format!("slice {} with e_1 = {}", s.slice.render_at(level)?, s.s1.render_at(level)?),
                    ),
                };
                let passed = match expect.as_deref() {
                    Some("found") => found.is_some(),
                    Some("none") => found.is_none(),
                    _ => true,
                };
                Ok(Done::check(data, summary, passed))
            }
            Command::Reynolds { der, slice, elem, level } => {
                let level = level.unwrap_or(depth);
                let s = self.slice(der, slice, level)?;
                let b = self.element_in(s.exponential.derivation().tower(), elem)?;
                let r = s.dixmier_reynolds(&b)?;
                let rr = s.dixmier_reynolds(&r)?;
                let idempotent = element_compare(&rr, &r, level)?.equal_to_depth;
                let invariant = s.localized_exponential.invariant_test(&r, level)?.invariant;
                let data = obj(json!({
                    "level": level,
                    "value": r.render_at(level)?,
                    "idempotent": idempotent,
                    "invariant": invariant,
                }));
                let summary = format!("R(b) = {} (mod level {level})", r.render_at(level)?);
                Ok(Done::check(data, summary, idempotent && invariant))
            }
            Command::Cylinder { der, slice, elem, level } => {
                let level = level.unwrap_or(depth);
                let s = self.slice(der, slice, level)?;
                let b = self.element_in(s.exponential.derivation().tower(), elem)?;
                let cyl = s.cylinder_decompose(&b, level)?;
                let coefficients = cyl
                    .coefficients
                    .iter()
                    .map(|c| c.render_at(level))
                    .collect::<indiga_core::Result<Vec<_>>>()?;
                let data = obj(json!({
                    "level": level,
                    "coefficients": coefficients,
                    "reconstructs": cyl.reconstructs,
                    "invariant": cyl.invariant,
                }));
                let summary = format!("b = Σ c_i σ^i with c = [{}]", coefficients.join(", "));
                Ok(Done::check(data, summary, cyl.reconstructs && cyl.invariant))
            }
            Command::Localize { tower, f, level, expect } => {
                let level = level.unwrap_or(depth);
                let t = self.tower(tower)?;
                let f = self.element_in(&t, f)?;
                let (loc, z) = is_zero_localization(&t, &f, level)?;
                let levels: Vec<Value> = z.levels.iter().map(|(n, zero)| json!({"level": n, "zero": zero})).collect();
                let mut data = obj(json!({"zero": z.zero_to_depth, "levels": levels}));
                if !z.zero_to_depth {
                    let w = loc.localization_var().expect("localized tower").clone();
                    let check = TowerElement::generator(&loc, &w).mul(&f.transport(&loc))?;
                    data.insert(
                        "inverse".into(),
                        json!({"variable": w.to_string(), "product": check.render_at(level)?}),
                    );
                }
                let summary = if z.zero_to_depth {
                    format!("localization is zero at every level to {level}")
                } else {
                    "localization is nonzero".to_string()
                };
                let passed = match expect.as_deref() {
                    Some("zero") => z.zero_to_depth,
                    Some("nonzero") => !z.zero_to_depth,
                    _ => true,
                };
                Ok(Done::check(data, summary, passed))
            }
            Command::Metric { a, b, depth: d } => {
                let d = d.unwrap_or(depth);
                let tower = self.tower_of_exprs(&[a, b])?;
                let (ea, eb) = (self.element_in(&tower, a)?, self.element_in(&tower, b)?);
                let c = element_compare(&ea, &eb, d)?;
                let data = obj(json!({
                    "depth": d,
                    "equal_to_depth": c.equal_to_depth,
                    "first_divergence": c.first_divergence,
                    "distance": rational_json(&c.metric),
                }));
                let summary = format!("distance {}", c.metric);
                Ok(Done::ok(data, summary))
            }
            Command::Higher { der, elem, order, level } => {
                let level = level.unwrap_or(depth);
                let d = self.derivation(der)?;
                let b = self.element_in(d.tower(), elem)?;
                let h = d.higher_element(*order, &b);
                let levels = self.render_levels(&h, d.tower().first_level(), level)?;
                let summary = format!("D^({order})(b) = {} (mod level {level})", h.render_at(level)?);
                Ok(Done::ok(obj(json!({"order": order, "levels": levels})), summary))
            }
            Command::Orbit { der, f, t, at } => {
                let e = self.exponential(der, depth)?;
                let tower = e.derivation().tower().clone();
                let data_ring = tower
                    .dual_data()
                    .ok_or_else(|| eval_err(format!("'{der}' does not act on a dual-coordinate tower")))?
                    .ring()
                    .clone();
                let fp = self.ring_polys(&data_ring, std::slice::from_ref(f))?.remove(0);
                let t = self
                    .rational(t)?
                    .ok_or_else(|| eval_err("orbit time must be a rational constant".into()))?;
                let point = at
                    .iter()
                    .map(|x| self.rational(x)?.ok_or_else(|| eval_err("orbit point must be rational".into())))
                    .collect::<SResult<Vec<_>>>()?;
                let r = e.orbit_evaluate(&t, &fp, &point)?;
                let data = obj(json!({
                    "level": r.level,
                    "through_tower": rational_json(&r.through_tower),
                    "direct": rational_json(&r.direct),
                    "agree": r.agree,
                }));
                let summary = format!("(t·f)(x0) = {} via level {}, direct {}", r.through_tower, r.level, r.direct);
                Ok(Done::check(data, summary, r.agree))
            }
        }
    }

    fn small_rational(&mut self) -> Rational {
        let num = self.rng.gen_range(-6i64..=6);
        let den = self.rng.gen_range(1i64..=3);
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn evaluation(&self, tower: &TowerRing, t: &Expr) -> SResult<Evaluation> {
        Ok(match self.rational(t)? {
            Some(q) => Evaluation::Rational(q),
            None => Evaluation::Element(self.element_in(tower, t)?),
        })
    }

    fn slice(&mut self, der: &str, slice: &Expr, level: usize) -> SResult<SliceData> {
        let e = self.exponential(der, level)?;
        let s = self.element_in(e.derivation().tower(), slice)?;
        find_local_slice(&e, std::slice::from_ref(&s), level)?
            .ok_or_else(|| SessionError::Core(indiga_core::Error::Precondition {
                mode: "slice".into(),
                witness: format!("{slice} is not a local slice"),
            }))
    }

    /// The tower of the first bound element named in `exprs`.
    fn tower_of_exprs(&self, exprs: &[&Expr]) -> SResult<TowerRing> {
        fn first_elem<'e>(e: &'e Expr, env: &HashMap<String, Binding>) -> Option<TowerRing> {
            match e {
                Expr::Name(n) => match env.get(n) {
                    Some(Binding::Elem(x)) => Some(x.tower().clone()),
                    _ => None,
                },
                Expr::Neg(a) => first_elem(a, env),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                    first_elem(a, env).or_else(|| first_elem(b, env))
                }
                Expr::Fold { body, .. } => first_elem(body, env),
                Expr::Indexed(..) | Expr::Num(_) => None,
            }
        }
        exprs
            .iter()
            .find_map(|e| first_elem(e, &self.env))
            .ok_or_else(|| eval_err("metric needs at least one bound element to fix the tower".into()))
    }
}

fn pattern_var(p: &Pattern) -> Option<&str> {
    match p {
        Pattern::Affine { var, .. } => Some(var),
        _ => None,
    }
}
