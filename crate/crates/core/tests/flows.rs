use hutchinson_core::hutchinson::{Absorption, HutchinsonOperator};
use hutchinson_core::hyperspace::{hausdorff, parse_cloud, write_cloud, FiniteCompact, PruneMode};
use hutchinson_core::multifunction::{
    check_weak_contraction, classify, lipschitz_estimate, validate_comparison_function,
    ClassifyOptions, ComparisonFunction, RegularityClass,
};
use hutchinson_core::probes::{hutchinson_modulus, ContinuityVerdict};
use hutchinson_core::systems::{build, presets, SystemSpec};
use hutchinson_core::{Point, Space};

/// Left endpoints of the level-n Cantor intervals, from base-3 digit strings.
fn cantor_level(n: u32) -> Vec<f64> {
    (0u64..1 << n)
        .map(|bits| {
            (0..n).fold(0.0, |acc, i| {
                let digit = if bits >> (n - 1 - i) & 1 == 1 { 2.0 } else { 0.0 };
                acc + digit / 3f64.powi(i as i32 + 1)
            })
        })
        .collect()
}

#[test]
fn sierpinski_tail_bound_covers_true_error() {
    let spec = presets::sierpinski();
    let f = HutchinsonOperator::with_pruning(build(&spec).unwrap(), 0.0, PruneMode::Greedy).unwrap();
    let r = f
        .solve_attractor(&spec.default_seed(), 1e-2, 50, spec.lipschitz_bound())
        .unwrap();
    assert!(r.converged);
    // Oracle: a deeper iterate is within 2^-k·diam of the attractor.
    let deep = f.power(&spec.default_seed(), r.iterations + 4).unwrap();
    let err = hausdorff(&r.attractor, &deep).unwrap();
    assert!(err <= r.tail_bound.unwrap() + 1e-12, "{err} > {:?}", r.tail_bound);
}

#[test]
fn cantor_iterates_match_digit_expansion() {
    let f = HutchinsonOperator::new(build(&presets::cantor()).unwrap());
    let b = f.power(&FiniteCompact::from_reals(&[0.0]).unwrap(), 8).unwrap();
    let oracle = FiniteCompact::from_reals(&cantor_level(8)).unwrap();
    assert_eq!(b.len(), 256);
    assert!(hausdorff(&b, &oracle).unwrap() < 1e-12);
}

#[test]
fn absorption_from_far_seeds() {
    let f = HutchinsonOperator::with_pruning(build(&presets::cantor()).unwrap(), 1e-6, PruneMode::Greedy).unwrap();
    let a = FiniteCompact::from_reals(&cantor_level(10)).unwrap();
    let seeds = [
        FiniteCompact::from_reals(&[5.0]).unwrap(),
        FiniteCompact::from_reals(&[-3.0, 0.5, 10.0]).unwrap(),
    ];
    for r in f.absorption_check(&a, &seeds, 1e-3, 20).unwrap() {
        match r {
            Absorption::Absorbed { n0 } => assert!(n0 <= 10, "{n0}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn weak_preset_is_weak_but_not_contractive() {
    let spec = presets::weak();
    let phi = build(&spec).unwrap();
    let eta = spec.comparison.clone().unwrap();
    assert!(validate_comparison_function(&eta, &ComparisonFunction::default_grid()).valid);
    let pairs = phi.sample_pairs(4000, 9);
    assert!(check_weak_contraction(&phi, &eta, &pairs).unwrap().passed());
    let l = lipschitz_estimate(&phi, &pairs).unwrap();
    assert!(l > 0.9 && l < 1.0, "{l}");
    let v = classify(&phi, &ClassifyOptions { eta: Some(eta), pairs: 4000, ..Default::default() }).unwrap();
    assert_eq!(v.class, RegularityClass::WeakContraction);
}

#[test]
fn presets_classify_as_declared() {
    for name in ["cantor", "constant", "projective", "usc_counterexample"] {
        let spec = presets::by_name(name).unwrap();
        let phi = build(&spec).unwrap();
        let opts = ClassifyOptions { pairs: 2000, eta: spec.comparison.clone(), ..Default::default() };
        assert_eq!(classify(&phi, &opts).unwrap().class, spec.declared_class, "{name}");
    }
}

#[test]
fn projective_attractor_modulus_decays() {
    let spec = presets::projective();
    let phi = build(&spec).unwrap();
    let f = HutchinsonOperator::with_pruning(phi.clone(), 1e-3, PruneMode::Greedy).unwrap();
    let r = f.solve_attractor(&spec.default_seed(), 5e-3, 100, None).unwrap();
    assert!(r.converged);
    let grid: Vec<f64> = (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let m = hutchinson_modulus(&HutchinsonOperator::new(phi), &r.attractor, &grid, 16, 4).unwrap();
    assert_eq!(m.verdict, ContinuityVerdict::Decaying);
    assert!(m.moduli.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn system_files_and_clouds_round_trip() {
    for name in presets::NAMES {
        let spec = presets::by_name(name).unwrap();
        let again = SystemSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again.to_json(), spec.to_json());
    }
    let set = FiniteCompact::from_rows(
        Space::ProjectivePlane,
        &[[0.1, 0.2, 0.3], [1.0, 0.0, 0.0], [0.3, 0.3, 0.9]],
    )
    .unwrap();
    let text = write_cloud(&set);
    let back = parse_cloud(&text).unwrap();
    assert_eq!(back, set);
    assert_eq!(write_cloud(&back), text);
}

#[test]
fn probes_are_seed_deterministic() {
    let phi = build(&presets::sierpinski()).unwrap();
    let c = FiniteCompact::new(
        Space::Euclidean(2),
        vec![Point::new(Space::Euclidean(2), &[0.2, 0.3]).unwrap()],
    )
    .unwrap();
    let grid = [0.1, 0.05, 0.025];
    let f = HutchinsonOperator::new(phi);
    let a = hutchinson_modulus(&f, &c, &grid, 16, 7).unwrap();
    let b = hutchinson_modulus(&f, &c, &grid, 16, 7).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let other = hutchinson_modulus(&f, &c, &grid, 16, 8).unwrap();
    assert_ne!(a.moduli, other.moduli);
}
