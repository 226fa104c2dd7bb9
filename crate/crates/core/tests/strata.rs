//! Membership in `P`, `P_r`, `Q_med`, `Q_high`, `Q_V` and `Q` on constructed
//! polynomials, plus sampling sanity checks.

use std::sync::Arc;

use bertini_sieve::geometry::ClosedPoint;
use bertini_sieve::ideals::{self, Admissible, LocalConditions};
use bertini_sieve::linalg;
use bertini_sieve::sieve::{estimate_density, Mode, SieveConfig, SieveContext, SieveError, StrataFlags, Which};
use bertini_sieve::{Elem, Poly, RationalZeta, Scheme, Tower};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f2() -> Arc<Tower> {
    Tower::new(2, 1).unwrap()
}

fn plane(t: &Arc<Tower>) -> Scheme {
    Scheme::projective_space(t.clone(), 2)
}

fn point_z(t: &Arc<Tower>) -> Scheme {
    Scheme::new(t.clone(), 2, vec![Poly::var(3, 0), Poly::var(3, 1)])
        .unwrap()
        .with_closed_form(RationalZeta::points(2, &[1]))
}

fn monomial(t: &Tower, e: [u32; 3]) -> Poly {
    Poly::from_terms(3, &t.base(), [(e.to_vec(), Elem(1))])
}

fn classify(ctx: &SieveContext, f: &Poly) -> StrataFlags {
    ctx.classify(&ctx.coordinates_of(f).expect("f lies in I_d")).unwrap()
}

/// Random elements of `I_d` singular at every point of `at`.
fn forced_singular(
    ctx: &SieveContext,
    u: &Scheme,
    at: &[&ClosedPoint],
    rng: &mut ChaCha8Rng,
) -> Poly {
    let basis = ctx.basis();
    let mut rows = Vec::new();
    for p in at {
        rows.extend(ideals::jet_rows(u, p, basis).unwrap());
    }
    let kernel = linalg::kernel(basis.field(), &rows, basis.dim());
    assert!(!kernel.is_empty());
    loop {
        let mut coords = vec![Elem(0); basis.dim()];
        for v in &kernel {
            if rng.gen_bool(0.5) {
                for (c, x) in coords.iter_mut().zip(v) {
                    *c = basis.field().add(*c, *x);
                }
            }
        }
        if coords.iter().any(|c| c.0 != 0) {
            return basis.poly(&coords);
        }
    }
}

#[test]
fn lone_singularity_on_z_is_in_p() {
    let t = f2();
    let mut cfg = SieveConfig::new(plane(&t), point_z(&t), 2);
    cfg.l = Some(0);
    let ctx = SieveContext::new(&cfg, 4).unwrap();
    let origin = ClosedPoint::from_coords(&t, 1, &[Elem(0), Elem(0), Elem(1)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut found = 0;
    for _ in 0..400 {
        let f = forced_singular(&ctx, &cfg.u, &[&origin], &mut rng);
        let flags = classify(&ctx, &f);
        let sing = ctx.singular_points(&flags);
        assert!(sing.contains(&origin));
        if sing.len() == 1 {
            assert!(flags.in_p && flags.in_p_r, "{f:?}");
            found += 1;
        }
    }
    assert!(found > 0);
}

#[test]
fn rational_singularity_off_z_leaves_p() {
    let t = f2();
    let cfg = SieveConfig::new(plane(&t), point_z(&t), 2);
    let ctx = SieveContext::new(&cfg, 4).unwrap();
    let p = ClosedPoint::from_coords(&t, 1, &[Elem(1), Elem(0), Elem(0)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let flags = classify(&ctx, &forced_singular(&ctx, &cfg.u, &[&p], &mut rng));
        assert!(!flags.in_p && !flags.in_p_r);
        assert!(ctx.singular_points(&flags).contains(&p));
    }
}

#[test]
fn medium_and_high_windows() {
    let t = f2();
    let mut cfg = SieveConfig::new(plane(&t), point_z(&t), 2);
    cfg.r = 2;
    // c = 1 and m = 2, so the medium window at d = 7 is [2, 2] and degree 3 is high.
    let ctx = SieveContext::new(&cfg, 7).unwrap();
    assert_eq!(ctx.c(), 1);
    let quad = cfg.u.closed_points(2).unwrap().remove(0);
    let cubic = cfg.u.closed_points(3).unwrap().remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let flags = classify(&ctx, &forced_singular(&ctx, &cfg.u, &[&quad], &mut rng));
        assert!(flags.in_q_med && !flags.in_p);
        let flags = classify(&ctx, &forced_singular(&ctx, &cfg.u, &[&cubic], &mut rng));
        assert!(flags.in_q_high && !flags.in_p);
    }
    // A section smooth at every enumerated point sits in neither window.
    let smooth = (0..)
        .map(|_| linalg::FpVec::random(2, ctx.coordinate_len(), &mut rng))
        .map(|x| ctx.classify(&x).unwrap())
        .find(|f| f.in_p)
        .unwrap();
    assert!(!smooth.in_q_med && !smooth.in_q_high && smooth.singular.iter().all(|&i| ctx.point(i).degree() == 1));

    // At d = 4 the medium window [2, 1] is empty.
    let ctx = SieveContext::new(&cfg, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let flags = classify(&ctx, &forced_singular(&ctx, &cfg.u, &[&quad], &mut rng));
        assert!(!flags.in_q_med && flags.in_q_high);
    }
}

#[test]
fn singular_along_v() {
    let t = f2();
    let line = Scheme::new(t.clone(), 2, vec![Poly::var(3, 0)])
        .unwrap()
        .with_closed_form(RationalZeta::line(2));
    let mut cfg = SieveConfig::new(plane(&t), line, 2);
    cfg.l = Some(1);
    let ctx = SieveContext::new(&cfg, 3).unwrap();
    // x²y is singular along the whole line x = 0.
    let flags = classify(&ctx, &monomial(&t, [2, 1, 0]));
    assert!(flags.in_q_v && !flags.in_p);
    // x(y² + yz + z²) + x³ is smooth.
    let base = t.base();
    let smooth = Poly::from_terms(
        3,
        &base,
        [[1, 2, 0], [1, 1, 1], [1, 0, 2], [3, 0, 0]].map(|e| (e.to_vec(), Elem(1))),
    );
    let flags = classify(&ctx, &smooth);
    assert!(!flags.in_q_v && flags.in_p);

    // V a single point: never in Q_V.
    let mut cfg = SieveConfig::new(plane(&t), point_z(&t), 2);
    cfg.samples = 2000;
    let rep = estimate_density(&cfg, 5, Mode::MonteCarlo).unwrap();
    assert_eq!(rep.stratum("Q_V").unwrap().count, 0);
}

#[test]
fn theorem2_q_membership() {
    let t = f2();
    let xy = monomial(&t, [1, 1, 0]);
    let z = Scheme::new(t.clone(), 2, vec![xy]).unwrap().with_closed_form(RationalZeta::two_lines(2));
    let mut cfg = SieveConfig::new(plane(&t), z, 2);
    cfg.which = Which::Theorem2;
    let ctx = SieveContext::new(&cfg, 3).unwrap();
    // Singular along x = 0.
    let flags = classify(&ctx, &monomial(&t, [2, 1, 0]));
    assert!(flags.in_q && !flags.in_p);
    // xyz: three nodes, a finite singular set inside Z.
    let flags = classify(&ctx, &monomial(&t, [1, 1, 1]));
    assert!(!flags.in_q);
    assert_eq!(ctx.singular_points(&flags).len(), 3);
    assert!(flags.in_p);
}

#[test]
fn restriction_values_are_uniform() {
    let t = f2();
    let u = plane(&t);
    let y = u.closed_points(2).unwrap().remove(0);
    let u = u.with_removed(vec![y.clone()]).unwrap();
    let t0 = Elem(2);
    let mut cfg = SieveConfig::new(u, Scheme::empty(t.clone(), 2), 2);
    cfg.local = LocalConditions::new(&t, vec![y], Admissible::Listed([vec![t0]].into_iter().collect())).unwrap();
    cfg.samples = 8000;
    cfg.b = 1;
    cfg.r = 1;
    cfg.ext_bound = 1;
    let ctx = SieveContext::new(&cfg, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 8000;
    let len = ctx.coordinate_len();
    let hits = (0..n)
        .filter(|_| {
            let x = linalg::FpVec::random(2, len, &mut rng);
            ctx.classify(&x).unwrap().restriction_ok
        })
        .count() as f64;
    let sigma = (n as f64 * 0.25 * 0.75).sqrt();
    assert!((hits - n as f64 / 4.0).abs() <= 3.0 * sigma, "{hits}");
}

#[test]
fn empirical_gap_shrinks_with_degree() {
    let t = f2();
    for (z, l) in [(Scheme::empty(t.clone(), 2), None), (point_z(&t), Some(0))] {
        let mut cfg = SieveConfig::new(plane(&t), z, 2);
        cfg.l = l;
        cfg.samples = 20_000;
        cfg.seed = 21;
        let reps: Vec<_> = [5, 6, 7, 8].iter().map(|&d| estimate_density(&cfg, d, Mode::MonteCarlo).unwrap()).collect();
        for (a, b) in reps.iter().zip(&reps[2..]) {
            let (ha, hb) = (a.headline(), b.headline());
            let gap = |h: &bertini_sieve::sieve::StratumFrequency| (h.empirical - h.prediction.unwrap()).abs();
            assert!(gap(hb) <= gap(ha) + 2.0 * ha.radius, "d={} -> d={}", a.d, b.d);
        }
    }
}

#[test]
fn exhaustive_budget_is_enforced() {
    let t = f2();
    let mut cfg = SieveConfig::new(plane(&t), Scheme::empty(t.clone(), 2), 2);
    cfg.exhaustive_budget = 1 << 10;
    assert!(matches!(
        estimate_density(&cfg, 4, Mode::Exhaustive),
        Err(SieveError::BudgetExceeded { .. })
    ));
}

#[test]
fn sampled_counts_match_sample_size() {
    let t = f2();
    let mut cfg = SieveConfig::new(plane(&t), point_z(&t), 2);
    cfg.samples = 2500;
    let rep = estimate_density(&cfg, 5, Mode::MonteCarlo).unwrap();
    assert_eq!(rep.evaluated, 2500);
    assert_eq!(rep.zero_polynomials, 0);
    for s in &rep.strata {
        assert!((0.0..=1.0).contains(&s.empirical));
    }
    cfg.samples = 0;
    assert!(estimate_density(&cfg, 5, Mode::MonteCarlo).is_err());
    let rep = estimate_density(&cfg, 2, Mode::Exhaustive).unwrap();
    assert_eq!(rep.zero_polynomials, 1);
    assert_eq!(rep.evaluated, 1 << rep.dim_i_d);
}
