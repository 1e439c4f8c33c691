//! Local slices, the Dixmier-Reynolds operator, and the cylinder
//! decomposition after localizing at the slice's derivative.

use crate::derivation::Transform;
use crate::element::TowerElement;
use crate::error::{Error, Result};
use crate::exponential::RestrictedExponential;
use crate::poly::Rational;
use crate::series::LevelSeries;
use crate::tower::TowerRing;

use num_traits::One;

/// A local slice `s` with `e(s) = s + s_1 T`, packaged with the completed
/// localization at `s_1` and `σ = s/s_1` there.
#[derive(Clone, Debug)]
pub struct SliceData {
    pub slice: TowerElement,
    pub s1: TowerElement,
    pub localized: TowerRing,
    pub sigma: TowerElement,
    pub exponential: RestrictedExponential,
    /// The exponential induced on the localized tower.
    pub localized_exponential: RestrictedExponential,
    pub depth: usize,
}

/// The first candidate whose exponential has T-degree at most 1 at every
/// level up to `depth` and exactly 1 at `depth`.
pub fn find_local_slice(
    e: &RestrictedExponential,
    candidates: &[TowerElement],
    depth: usize,
) -> Result<Option<SliceData>> {
    for s in candidates {
        let series = e.exp_series(s)?;
        let mut ok = true;
        for n in 0..=depth {
            let d = series.at(n)?.t_degree().unwrap_or(0);
            if d > 1 || (n == depth && d != 1) {
                ok = false;
                break;
            }
        }
        if ok {
            return build_slice(e, s, depth).map(Some);
        }
    }
    Ok(None)
}

fn build_slice(e: &RestrictedExponential, s: &TowerElement, depth: usize) -> Result<SliceData> {
    let series = e.exp_series(s)?;
    let s1 = {
        let series = series.clone();
        TowerElement::from_fn(s.tower(), move |n| series.coefficient(&[1], n))
    };
    let outcome = e.invariant_test(&s1, depth)?;
    if let Some(n) = outcome.first_failure {
        return Err(Error::precondition(
            "slice",
            format!("e_1(s) = {} is not invariant at level {n}", s1.render_at(n)?),
        ));
    }
    let derivation = e.derivation().derive_transform(&Transform::Localize(s1.clone()), depth)?;
    let localized = derivation.tower().clone();
    let localized_exponential = RestrictedExponential::certify(&derivation, e.window())?;
    let w = localized.localization_var().expect("localized tower").clone();
    let sigma = TowerElement::generator(&localized, &w).mul(&s.transport(&localized))?;
    for n in 0..=depth {
        let level = localized.level(n)?;
        let got = localized_exponential.level_series(n, &sigma.at(n)?)?;
        let mut expected = LevelSeries::zero(level.universe(), 1);
        expected.add_term(vec![0], sigma.at(n)?);
        expected.add_term(vec![1], level.constant(Rational::one())?);
        if got != expected.normalize(&level)? {
            return Err(Error::precondition(
                "slice",
                format!("e(σ) ≠ σ + T at level {n}"),
            ));
        }
    }
    Ok(SliceData {
        slice: s.clone(),
        s1,
        localized,
        sigma,
        exponential: e.clone(),
        localized_exponential,
        depth,
    })
}

/// The coefficients `c_i = R(e_i(b))` with `b = Σ c_i σ^i`.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub coefficients: Vec<TowerElement>,
    /// `Σ c_i σ^i = b` at every level up to the depth.
    pub reconstructs: bool,
    /// Every `c_i` is invariant up to the depth.
    pub invariant: bool,
}

impl SliceData {
    /// `b` seen in the localized tower.
    pub fn localize_element(&self, b: &TowerElement) -> Result<TowerElement> {
        if b.tower().same(&self.localized) {
            Ok(b.clone())
        } else if b.tower().same(self.exponential.derivation().tower()) {
            Ok(b.transport(&self.localized))
        } else {
            Err(Error::universe("element of an unrelated tower"))
        }
    }

    /// `R(b) = Σ e_i(b)(-σ)^i`.
    pub fn dixmier_reynolds(&self, b: &TowerElement) -> Result<TowerElement> {
        let b = self.localize_element(b)?;
        let (e, sigma, tower) = (
            self.localized_exponential.clone(),
            self.sigma.clone(),
            self.localized.clone(),
        );
        Ok(TowerElement::from_fn(&self.localized, move |n| {
            let level = tower.level(n)?;
            let s = e.level_series(n, &b.at(n)?)?;
            s.eval_at(&sigma.at(n)?.scale(&-Rational::one()), &level)
        }))
    }

    /// `e_i(b)` in the localized tower.
    pub fn component(&self, b: &TowerElement, i: u32) -> Result<TowerElement> {
        let series = self.localized_exponential.exp_series(&self.localize_element(b)?)?;
        Ok(TowerElement::from_fn(&self.localized, move |n| series.coefficient(&[i], n)))
    }

    /// Decomposes `b` over the invariants in powers of `σ`, checking the
    /// reconstruction and invariance of the coefficients to `depth`.
    pub fn cylinder_decompose(&self, b: &TowerElement, depth: usize) -> Result<Cylinder> {
        let lb = self.localize_element(b)?;
        let series = self.localized_exponential.exp_series(&lb)?;
        let mut top = 0;
        for n in 0..=depth {
            top = top.max(series.at(n)?.t_degree().unwrap_or(0));
        }
        let mut coefficients = Vec::new();
        for i in 0..=top {
            coefficients.push(self.dixmier_reynolds(&self.component(&lb, i)?)?);
        }
        let mut sum = TowerElement::zero(&self.localized);
        for (i, c) in coefficients.iter().enumerate() {
            sum = sum.add(&c.mul(&self.sigma.pow(i as u32))?)?;
        }
        let mut reconstructs = true;
        for n in 0..=depth {
            if sum.at(n)? != lb.at(n)? {
                reconstructs = false;
                break;
            }
        }
        let mut invariant = true;
        for c in &coefficients {
            if !self.localized_exponential.invariant_test(c, depth)?.invariant {
                invariant = false;
                break;
            }
        }
        Ok(Cylinder {
            coefficients,
            reconstructs,
            invariant,
        })
    }
}
