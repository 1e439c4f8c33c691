mod common;

use common::*;
use indiga_core::derivation::Transform;
use indiga_core::exponential::Combine;
use indiga_core::series::Evaluation;
use indiga_core::{
    find_local_slice, is_zero_localization, rat, ratio, IntegrabilityVerdict, Poly, RestrictedExponential,
    TowerElement, TowerRing, Universe, VarId, Window,
};

#[test]
fn ufc_exponential_is_geometric() {
    let (t, d) = ufc();
    let e = RestrictedExponential::certify(&d, Window::default()).unwrap();
    let u = TowerElement::generator(&t, &VarId::named("u"));
    let s = e.exp_series(&u).unwrap();
    for n in 2..=6usize {
        let level = s.at(n).unwrap();
        assert_eq!(level.t_degree(), Some(n as u32 - 2));
        for i in 0..=(n as u32 - 2) {
            let c = level.coefficient(&[i]);
            assert_eq!(t.level(n).unwrap().render(&c), if i == 0 { "u".to_string() } else { format!("u^{}", i + 1) });
        }
    }
    let cands = [u.clone(), u.pow(2)];
    assert!(find_local_slice(&e, &cands, 6).unwrap().is_none());
}

#[test]
fn dplus_certified_with_constant_kernel() {
    let (_, d) = dplus();
    let v = d.check_integrable(Window::default()).unwrap();
    assert!(v.is_certified(), "{v:?}");
    let k = d.kernel_basis(4, 2).unwrap();
    assert_eq!(k.iter().map(|p| p.to_string()).collect::<Vec<_>>(), vec!["1"]);
}

#[test]
fn mixed_refuted_with_replayable_family() {
    let (t, d) = mixed();
    assert_eq!(d.shift(), 2);
    let v = d.check_integrable(Window::default()).unwrap();
    let IntegrabilityVerdict::Refuted { level, family, .. } = v else {
        panic!("expected refutation, got {v:?}");
    };
    assert_eq!(level, 1);
    for l in 1..=3u32 {
        let g = VarId::indexed("X", 2 * l);
        assert!(family
            .iter()
            .any(|w| w.generator.to_string() == g.to_string() && w.power == l as usize));
        let x = TowerElement::generator(&t, &g);
        let image = d.apply_power(l as usize, &x, 1).unwrap();
        assert_eq!(image.to_string(), "X[0]");
    }
    for w in &family {
        let g = TowerElement::from_poly(&t, w.generator.clone());
        assert!(!d.apply_power(w.power, &g, w.level).unwrap().is_zero());
    }
}

#[test]
fn danielewski_descends_to_quotient() {
    let dan = danielewski();
    let v = dan.derivation.check_integrable(Window { max_level: 4, max_power: 12 }).unwrap();
    assert!(v.is_certified(), "{v:?}");
    let qd = dan
        .derivation
        .derive_transform(&Transform::Quotient(vec![dan.relation.clone()]), 4)
        .unwrap();
    let q = qd.tower().clone();
    q.audit_transitions(4).unwrap();
    q.audit_surjectivity(4).unwrap();
    let level2 = q.level(2).unwrap();
    assert_eq!(level2.ideal().len(), 1);
    let e = RestrictedExponential::certify(&qd, Window { max_level: 4, max_power: 12 }).unwrap();
    let rel = dan.relation.transport(&q);
    assert!(rel.is_zero_to_depth(4).unwrap());
    let base_e = RestrictedExponential::certify(&dan.derivation, Window { max_level: 4, max_power: 12 }).unwrap();
    assert!(base_e.invariant_test(&dan.relation, 4).unwrap().invariant);
    assert!(e.invariant_test(&dan.x.transport(&q), 4).unwrap().invariant);
    assert!(!e.invariant_test(&dan.y.transport(&q), 4).unwrap().invariant);
    let _ = &dan.z;
}

#[test]
fn localization_zero_and_nonzero() {
    let (t, _) = ufc();
    let u = TowerElement::generator(&t, &VarId::named("u"));
    let (_, z) = is_zero_localization(&t, &u, 6).unwrap();
    assert!(z.zero_to_depth);
    let (t, _) = d_dx();
    let x = TowerElement::generator(&t, &VarId::named("x"));
    let (loc, z) = is_zero_localization(&t, &x, 6).unwrap();
    assert!(!z.zero_to_depth);
    let w = TowerElement::generator(&loc, loc.localization_var().unwrap());
    let prod = w.mul(&x.transport(&loc)).unwrap();
    assert_eq!(prod.render_at(3).unwrap(), "1");
}

#[test]
fn slice_by_translation_is_maclaurin() {
    let (t, d) = d_dx();
    let e = RestrictedExponential::certify(&d, Window::default()).unwrap();
    let x = TowerElement::generator(&t, &VarId::named("x"));
    let sd = find_local_slice(&e, &[x.clone()], 3).unwrap().unwrap();
    assert_eq!(sd.s1.render_at(0).unwrap(), "1");
    let uni = Universe::new(vec![VarId::named("x")]).unwrap();
    let xp = var(&uni, "x");
    let p = &(&xp.pow(3).scale(&rat(2)) - &xp) + &Poly::constant(&uni, rat(7));
    let b = TowerElement::from_poly(&t, p);
    assert_eq!(sd.dixmier_reynolds(&b).unwrap().render_at(2).unwrap(), "7");
    let cyl = sd.cylinder_decompose(&b, 3).unwrap();
    assert!(cyl.reconstructs && cyl.invariant);
    let coeffs: Vec<String> = cyl.coefficients.iter().map(|c| c.render_at(2).unwrap()).collect();
    assert_eq!(coeffs, vec!["7", "-1", "0", "2"]);
}

#[test]
fn scale_sum_and_conjugate() {
    let (x, y, z) = (VarId::named("x"), VarId::named("y"), VarId::named("z"));
    let u = Universe::new(vec![x.clone(), y.clone(), z.clone()]).unwrap();
    let t = TowerRing::discrete(&[x.clone(), y.clone(), z.clone()], &[]).unwrap();
    let partial = |v: &VarId| {
        let images = [&x, &y, &z]
            .into_iter()
            .map(|w| (w.clone(), if w == v { Poly::one(&u) } else { Poly::zero(&u) }))
            .collect();
        indiga_core::Derivation::from_polys(&t, images, None, Default::default()).unwrap()
    };
    let (dy, dz) = (partial(&y), partial(&z));
    let xs = TowerElement::generator(&t, &x);
    let scaled = dy.derive_transform(&Transform::ScaleByInvariant(xs.clone()), 3).unwrap();
    assert_eq!(scaled.image(&y).unwrap().render_at(0).unwrap(), "x");
    assert!(dy.derive_transform(&Transform::ScaleByInvariant(TowerElement::generator(&t, &y)), 3).is_err());

    let ey = RestrictedExponential::certify(&dy, Window::default()).unwrap();
    let ez = RestrictedExponential::certify(&dz, Window::default()).unwrap();
    let both = ey.combine(&Combine::ComposeCommuting(ez), 3).unwrap();
    let f = TowerElement::generator(&t, &y).mul(&TowerElement::generator(&t, &z)).unwrap();
    assert_eq!(both.exp_series(&f).unwrap().render_at(0).unwrap(), "y*z + (y + z)*T + T^2 (mod level 0)");

    let moved = ey.flow(&Evaluation::Element(xs.clone()), &TowerElement::generator(&t, &y), 3).unwrap();
    assert_eq!(moved.render_at(0).unwrap(), "x + y");
    assert!(ey.flow(&Evaluation::Element(TowerElement::generator(&t, &y)), &xs, 3).is_err());

    let xp = var(&u, "x");
    let ex = RestrictedExponential::certify(&partial(&x), Window::default()).unwrap();
    let c = ex
        .combine(
            &Combine::Conjugate {
                alpha: vec![(x.clone(), xp.scale(&rat(2)))],
                alpha_inv: vec![(x.clone(), xp.scale(&ratio(1, 2)))],
            },
            2,
        )
        .unwrap();
    assert_eq!(c.derivation().image(&x).unwrap().render_at(0).unwrap(), "1/2");
}
