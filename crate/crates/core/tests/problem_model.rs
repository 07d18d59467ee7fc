mod common;

use common::{component, gram, largest_eigenvalue, Stream};
use egap::bench::generate_example1;
use egap::{Block, ComponentSpec, Coupling, Error, Objective, ProxFunction, SeparableProblem};

const EXAMPLE1_DOC: &str = r#"{
  "components": [
    {"objective": {"kind": "weighted_abs", "params": {"w": [1], "a": [1]}}, "box": {"lower": [-5], "upper": [7]}, "block": "identity"},
    {"objective": {"kind": "weighted_abs", "params": {"w": [2], "a": [2]}}, "box": {"lower": [-5], "upper": [7]}, "block": "identity"},
    {"objective": {"kind": "weighted_abs", "params": {"w": [3], "a": [3]}}, "box": {"lower": [-5], "upper": [7]}, "block": "identity"},
    {"objective": {"kind": "weighted_abs", "params": {"w": [4], "a": [4]}}, "box": {"lower": [-5], "upper": [7]}, "block": "identity"},
    {"objective": {"kind": "weighted_abs", "params": {"w": [5], "a": [5]}}, "box": {"lower": [-5], "upper": [7]}, "block": "identity"}
  ],
  "b": [10],
  "coupling": "eq"
}"#;

fn zero_component(lower: Vec<f64>, upper: Vec<f64>, block: Block) -> ComponentSpec {
    component(Objective::Zero, lower, upper, block)
}

fn random_dense(s: &mut Stream, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| s.range(-1.0, 1.0)).collect()).collect()
}

#[test]
fn example1_document_parses() {
    let p = SeparableProblem::from_json(EXAMPLE1_DOC).unwrap();
    assert_eq!(p.num_components(), 5);
    assert_eq!(p.num_rows(), 1);
    assert_eq!(p.num_vars(), 5);
    assert_eq!(p.rhs(), &[10.0]);
    assert_eq!(p.coupling(), Coupling::Equality);
    for c in p.components() {
        assert_eq!(c.prox.center, vec![1.0]);
        assert_eq!(c.prox.scale, 1.0);
    }
    assert_eq!(p, generate_example1());
}

#[test]
fn document_round_trip() {
    let p = generate_example1();
    let again = SeparableProblem::from_json(&p.to_json()).unwrap();
    assert_eq!(p, again);

    let mut s = Stream::new(3);
    let comps = (0..3)
        .map(|_| zero_component(vec![-1.0; 2], vec![1.0; 2], Block::dense(random_dense(&mut s, 3, 2))))
        .collect();
    let p = SeparableProblem::new(comps, vec![0.1, 0.2, 0.3], Coupling::Inequality).unwrap();
    assert_eq!(p, SeparableProblem::from_json(&p.to_json()).unwrap());
}

#[test]
fn single_zero_component_with_degenerate_box_is_valid() {
    let doc = r#"{"components":[{"objective":{"kind":"zero"},"box":{"lower":[0],"upper":[0]},"block":"identity"}],"b":[0]}"#;
    let p = SeparableProblem::from_json(doc).unwrap();
    assert_eq!(p.num_components(), 1);
    assert_eq!(p.compute_constants().unwrap().prox_diameters, vec![0.0]);
}

#[test]
fn block_row_mismatch_names_the_component() {
    let doc = r#"{"components":[
        {"objective":{"kind":"zero"},"box":{"lower":[0],"upper":[1]},"block":{"dense":[[1],[1]]}},
        {"objective":{"kind":"zero"},"box":{"lower":[0],"upper":[1]},"block":{"dense":[[1],[1],[1]]}}
      ],"b":[1,1]}"#;
    match SeparableProblem::from_json(doc) {
        Err(Error::DimensionMismatch { component, .. }) => assert_eq!(component, 1),
        other => panic!("expected a dimension mismatch, got {other:?}"),
    }
}

#[test]
fn validation_errors() {
    let unbounded = zero_component(vec![0.0], vec![1.0], Block::Identity(1));
    let mut bad = unbounded.clone();
    bad.upper = vec![f64::INFINITY];
    bad.prox.center = vec![0.0];
    assert!(matches!(
        SeparableProblem::new(vec![unbounded.clone(), bad], vec![1.0], Coupling::Equality),
        Err(Error::UnboundedBox { component: 1 })
    ));

    let mut rho = unbounded.clone();
    rho.prox = ProxFunction {
        center: vec![0.5],
        scale: 0.0,
    };
    assert!(matches!(
        SeparableProblem::new(vec![rho], vec![1.0], Coupling::Equality),
        Err(Error::NonpositiveProxScale { component: 0, .. })
    ));

    let mut empty = unbounded.clone();
    empty.lower = vec![2.0];
    assert!(matches!(
        SeparableProblem::new(vec![empty], vec![1.0], Coupling::Equality),
        Err(Error::EmptyBox { component: 0, coordinate: 0 })
    ));

    let zero_block = zero_component(vec![0.0], vec![1.0], Block::dense(vec![vec![0.0]]));
    assert!(matches!(
        SeparableProblem::new(vec![zero_block], vec![1.0], Coupling::Equality),
        Err(Error::ZeroBlock { component: 0 })
    ));

    assert!(matches!(
        SeparableProblem::new(vec![], vec![1.0], Coupling::Equality),
        Err(Error::EmptyProblem)
    ));

    let doc = r#"{"components":[{"objective":{"kind":"convex_quadratic","params":{"Q":[[1,0],[0,-1]],"q":[0,0]}},"box":{"lower":[0,0],"upper":[1,1]},"block":"identity"}],"b":[1,1]}"#;
    assert!(matches!(
        SeparableProblem::from_json(doc),
        Err(Error::InvalidObjective { component: 0, .. })
    ));

    assert!(matches!(SeparableProblem::from_json("{not json"), Err(Error::Document(_))));
}

#[test]
fn objective_value_and_residual_on_example1() {
    let p = generate_example1();
    let x: Vec<Vec<f64>> = [-4.0, 2.0, 3.0, 4.0, 5.0].iter().map(|v| vec![*v]).collect();
    assert_eq!(p.objective_value(&x).unwrap(), 5.0);
    assert_eq!(p.residual(&x), vec![0.0]);
    let centers = p.prox_centers();
    assert_eq!(p.residual(&centers), vec![-5.0]);
    assert_eq!(p.relative_feasibility(5.0), 0.5);
}

#[test]
fn blockwise_residual_matches_dense_assembly() {
    let mut s = Stream::new(11);
    for _ in 0..100 {
        let m = 1 + (s.unit() * 4.0) as usize;
        let count = 2 + (s.unit() * 4.0) as usize;
        let mut comps = Vec::new();
        let mut x = Vec::new();
        let mut dense: Vec<Vec<f64>> = vec![Vec::new(); m];
        for _ in 0..count {
            let (n, block, rows): (usize, Block, Vec<Vec<f64>>) = if s.unit() < 0.3 {
                let eye = (0..m).map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect();
                (m, Block::Identity(m), eye)
            } else {
                let n = 1 + (s.unit() * 3.0) as usize;
                let a = random_dense(&mut s, m, n);
                (n, Block::dense(a.clone()), a)
            };
            for (row, brow) in dense.iter_mut().zip(&rows) {
                row.extend(brow);
            }
            x.push((0..n).map(|_| s.range(-1.0, 1.0)).collect::<Vec<f64>>());
            comps.push(zero_component(vec![-1.0; n], vec![1.0; n], block));
        }
        let b: Vec<f64> = (0..m).map(|_| s.range(-2.0, 2.0)).collect();
        let p = SeparableProblem::new(comps, b.clone(), Coupling::Equality).unwrap();
        let xf: Vec<f64> = x.iter().flatten().copied().collect();
        let got = p.residual(&x);
        for r in 0..m {
            let want: f64 = dense[r].iter().zip(&xf).map(|(a, v)| a * v).sum::<f64>() - b[r];
            let scale = dense[r].iter().zip(&xf).map(|(a, v)| (a * v).abs()).sum::<f64>() + b[r].abs();
            assert!((got[r] - want).abs() <= 1e-14 * scale.max(1.0), "row {r}: {} vs {want}", got[r]);
        }
    }
}

#[test]
fn spectral_norm_examples() {
    assert_eq!(Block::Identity(4).spectral_norm().unwrap(), 1.0);
    assert_eq!(Block::dense(vec![vec![-3.0]]).spectral_norm().unwrap(), 3.0);
}

#[test]
fn spectral_norm_matches_eigenvalue_oracle() {
    let mut s = Stream::new(5);
    for _ in 0..20 {
        let a = random_dense(&mut s, 5, 4);
        let want = largest_eigenvalue(&gram(&a)).sqrt();
        let got = Block::dense(a.clone()).spectral_norm().unwrap();
        assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");

        let alpha = s.range(-3.0, 3.0);
        let scaled: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| alpha * v).collect()).collect();
        let got_scaled = Block::dense(scaled).spectral_norm().unwrap();
        assert!((got_scaled - alpha.abs() * got).abs() <= 1e-8 * alpha.abs() * got);
    }
}

#[test]
fn constants_examples() {
    let two = SeparableProblem::new(
        vec![
            zero_component(vec![0.0], vec![1.0], Block::Identity(1)),
            zero_component(vec![0.0], vec![1.0], Block::Identity(1)),
        ],
        vec![1.0],
        Coupling::Equality,
    )
    .unwrap();
    assert_eq!(two.compute_constants().unwrap().lbar, 2.0);

    let c = generate_example1().compute_constants().unwrap();
    assert_eq!(c.lbar, 5.0);
    assert_eq!(c.prox_diameters, vec![18.0; 5]);
    assert_eq!(c.sum_diameters(), 90.0);
    assert_eq!(c.dual_lipschitz(0.5), 10.0);
    assert_eq!(c.psi_lipschitz(2, 5.0), 1.0);
}

#[test]
fn strong_convexity_constant_requires_every_component() {
    let c = generate_example1().compute_constants().unwrap();
    assert!(matches!(
        c.smooth_dual_grad_lipschitz(),
        Err(Error::NotStronglyConvex { component: 0 })
    ));
}

#[test]
fn doubling_prox_scale_halves_lbar_and_doubles_diameters() {
    let p = generate_example1();
    let before = p.compute_constants().unwrap();
    let comps = p
        .components()
        .iter()
        .cloned()
        .map(|mut c| {
            c.prox.scale *= 2.0;
            c
        })
        .collect();
    let doubled = SeparableProblem::new(comps, p.rhs().to_vec(), Coupling::Equality).unwrap();
    let after = doubled.compute_constants().unwrap();
    assert_eq!(after.lbar, before.lbar / 2.0);
    for (a, b) in after.prox_diameters.iter().zip(&before.prox_diameters) {
        assert_eq!(*a, 2.0 * b);
    }
}

#[test]
fn slack_on_equality_problem_warns() {
    let p = generate_example1();
    let (same, warning) = p.add_slack_component();
    assert!(warning.is_some());
    assert_eq!(same, p);
}

#[test]
fn slack_with_b_at_lower_corner_has_degenerate_box() {
    let comps = vec![
        zero_component(vec![-1.0], vec![1.0], Block::Identity(1)),
        zero_component(vec![0.5], vec![2.0], Block::Identity(1)),
    ];
    let p = SeparableProblem::new(comps, vec![-0.5], Coupling::Inequality).unwrap();
    let (slacked, warning) = p.add_slack_component();
    assert!(warning.is_none());
    assert_eq!(slacked.num_components(), 3);
    assert_eq!(slacked.coupling(), Coupling::Equality);
    let slack = &slacked.components()[2];
    assert_eq!(slack.lower, vec![0.0]);
    assert_eq!(slack.upper, vec![0.0]);
    assert_eq!(slack.objective, Objective::Zero);
}

#[test]
fn slack_preserves_feasibility_on_grids() {
    let mut s = Stream::new(21);
    for _ in 0..30 {
        let m = 1 + (s.unit() * 2.0) as usize;
        let dims = [1 + (s.unit() * 2.0) as usize, 1];
        let comps: Vec<ComponentSpec> = dims
            .iter()
            .map(|&n| zero_component(vec![-1.0; n], vec![1.0; n], Block::dense(random_dense(&mut s, m, n))))
            .collect();
        let b: Vec<f64> = (0..m).map(|_| s.range(-1.0, 1.5)).collect();
        let p = SeparableProblem::new(comps, b, Coupling::Inequality).unwrap();
        let (slacked, _) = p.add_slack_component();
        let slack = &slacked.components()[2];
        let n: usize = dims.iter().sum();
        assert!(n <= 3);
        let levels = [-1.0, 0.0, 1.0];
        for code in 0..3usize.pow(n as u32) {
            let flat: Vec<f64> = (0..n).map(|j| levels[code / 3usize.pow(j as u32) % 3]).collect();
            let x = vec![flat[..dims[0]].to_vec(), flat[dims[0]..].to_vec()];
            let r = p.residual(&x);
            let feasible = r.iter().all(|v| *v <= 1e-12);
            let t: Vec<f64> = r.iter().map(|v| -v).collect();
            let t_in_box = t
                .iter()
                .zip(slack.lower.iter().zip(&slack.upper))
                .all(|(v, (l, u))| *v >= l - 1e-12 && *v <= u + 1e-12);
            let mut xs = x.clone();
            xs.push(t);
            let slacked_feasible = t_in_box && slacked.residual(&xs).iter().all(|v| v.abs() <= 1e-12);
            assert_eq!(feasible, slacked_feasible, "grid point {flat:?}");
        }
    }
}
