mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thpnoma::conic::{
    dump, kkt_residuals, load, solve, Affine, Cone, ConeBlock, ConicProgram, ProgramBuilder, SolveStatus,
};

#[test]
fn verification_suite_meets_tolerances() {
    for f in common::verification_suite() {
        let r = solve(&f.program, 1e-8).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{}", f.name);
        assert!((r.objective - f.optimum).abs() <= 1e-6, "{}: {} vs {}", f.name, r.objective, f.optimum);
        let kkt = kkt_residuals(&f.program, &r.x, &r.y);
        assert!(kkt.max() <= 1e-8, "{}: {:?}", f.name, kkt);
    }
}

#[test]
fn coarse_search_never_beats_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in common::verification_suite() {
        let r = solve(&f.program, 1e-8).unwrap();
        let coarse = common::coarse_search(&f, &mut rng);
        assert!(r.objective <= coarse + 1e-8, "{}: solver {} coarse {}", f.name, r.objective, coarse);
        assert!(coarse - r.objective < 5e-2, "{}: coarse search far off ({coarse})", f.name);
    }
}

#[test]
fn infeasible_and_unbounded() {
    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.minimize_coef(x, 1.0);
    b.nonneg(Affine::var(x).plus_const(-2.0));
    b.le(Affine::var(x), Affine::constant(1.0));
    assert_eq!(solve(&b.build(), 1e-8).unwrap().status, SolveStatus::Infeasible);

    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.minimize_coef(x, -1.0);
    b.nonneg(Affine::var(x));
    assert_eq!(solve(&b.build(), 1e-8).unwrap().status, SolveStatus::Unbounded);

    let mut b = ProgramBuilder::new();
    b.var("x");
    b.nonneg(Affine::constant(-1.0));
    assert_eq!(solve(&b.build(), 1e-8).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn deterministic_results() {
    for f in common::verification_suite() {
        let a = solve(&f.program, 1e-8).unwrap();
        let b = solve(&f.program, 1e-8).unwrap();
        assert_eq!(a.x, b.x, "{}", f.name);
    }
}

#[test]
fn dumped_suite_solves_identically() {
    for f in common::verification_suite() {
        let back = load(&dump(&f.program)).unwrap();
        assert_eq!(back, f.program);
        assert_eq!(solve(&back, 1e-8).unwrap().x, solve(&f.program, 1e-8).unwrap().x);
    }
}

#[test]
fn malformed_program_rejected() {
    let p = ConicProgram {
        n_vars: 1,
        objective: vec![1.0],
        blocks: vec![ConeBlock { cone: Cone::Exp, rows: vec![Affine::var(0), Affine::constant(1.0)] }],
        names: vec![],
    };
    assert!(solve(&p, 1e-8).is_err());
}

fn arb_affine(n_vars: usize) -> impl Strategy<Value = Affine> {
    (-1e3f64..1e3, prop::collection::vec((0..n_vars, -1e3f64..1e3), 0..4))
        .prop_map(|(constant, terms)| Affine { constant, terms })
}

fn arb_program() -> impl Strategy<Value = ConicProgram> {
    (1usize..6).prop_flat_map(|n| {
        let cone = prop_oneof![
            (1usize..3).prop_map(Cone::Zero),
            (1usize..3).prop_map(Cone::Nonneg),
            (1usize..4).prop_map(Cone::SecondOrder),
            Just(Cone::Exp),
        ];
        let block = cone.prop_flat_map(move |c| {
            prop::collection::vec(arb_affine(n), c.dim()).prop_map(move |rows| ConeBlock { cone: c, rows })
        });
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(block, 0..5),
            any::<bool>(),
        )
            .prop_map(move |(objective, blocks, named)| ConicProgram {
                n_vars: n,
                objective,
                blocks,
                names: if named { (0..n).map(|i| format!("v{i} label")).collect() } else { vec![] },
            })
    })
}

proptest! {
    #[test]
    fn text_format_round_trips(p in arb_program()) {
        prop_assert_eq!(load(&dump(&p)).unwrap(), p);
    }
}
