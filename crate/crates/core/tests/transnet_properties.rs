use proptest::prelude::*;
use shapeinv_core::expr::{equiv, BinOp, DomainSampler, Expr, Func};
use shapeinv_core::transnet::{find_path, graph, pct_transform, verify_pct_edge, verify_projection};
use shapeinv_core::Bindings;

fn potential() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::sym("x")), (-5i64..=5).prop_map(Expr::int), (-2.0f64..2.0).prop_map(Expr::float)];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (prop::sample::select(&[Func::Exp, Func::Sin, Func::Cosh, Func::Tanh, Func::Sech][..]), inner.clone())
                .prop_map(|(f, c)| Expr::apply(f, c)),
            (prop::sample::select(&[BinOp::Add, BinOp::Sub, BinOp::Mul][..]), inner.clone(), inner)
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // A translation has no derivative correction: the result is V(z + c) − E exactly.
    #[test]
    fn translation_is_composition_and_shift(v in potential(), c in -3.0f64..3.0, e in -2.0f64..2.0) {
        let u = Expr::sym("z") + Expr::float(c);
        let got = pct_transform(&v, "x", e, &u, "z").unwrap();
        let want = v.substitute("x", &u) - Expr::float(e);
        prop_assert_eq!(got, want);
    }

    // General affine u = s·z + c scales by u̇² = s².
    #[test]
    fn affine_substitution_scales(v in potential(), s in 0.2f64..3.0, flip in any::<bool>(), c in -3.0f64..3.0, e in -2.0f64..2.0, seed in any::<u64>()) {
        let s = if flip { -s } else { s };
        let u = Expr::float(s) * Expr::sym("z") + Expr::float(c);
        let got = pct_transform(&v, "x", e, &u, "z").unwrap();
        let want = Expr::float(s * s) * (v.substitute("x", &u) - Expr::float(e));
        let sampler = DomainSampler::new(seed).range("z", -1.5, 1.5).samples(32);
        prop_assert!(equiv(&got, &want, &sampler).unwrap());
    }

    #[test]
    fn reachability_is_symmetric(i in 0usize..12, j in 0usize..12) {
        let nodes = graph().nodes();
        let (a, b) = (&nodes[i], &nodes[j]);
        prop_assert_eq!(find_path(a, b).is_ok(), find_path(b, a).is_ok());
    }
}

#[test]
fn paths_are_shortest_and_deterministic() {
    let first = find_path("coulomb", "rosen-morse-2").unwrap();
    assert_eq!(first, find_path("coulomb", "rosen-morse-2").unwrap());
    // coulomb -> morse -> scarf-hyp, then around the hexagon: 61, 56 backwards.
    let ids: Vec<_> = first.iter().map(|s| s.edge.as_str()).collect();
    assert_eq!(ids, ["T_ca", "R_a1", "T_61", "T_56"]);
    assert!(first[2].reversed && first[3].reversed);
}

#[test]
fn type_i_reaches_type_ii_only_through_projections() {
    for src in ["scarf-hyp", "gen-poschl-teller", "scarf-trig", "rosen-morse-1", "rosen-morse-2", "eckart"] {
        let p = find_path(src, "coulomb").unwrap();
        assert_eq!(p.iter().filter(|s| s.edge.starts_with("P_")).count(), 1, "{src}: {p:?}");
    }
}

// Oracle: with u = −2 ln r the Morse V₋ at E becomes
// 4B²r² − 4B(2A+1) + (4(A²−E) − 1/4)/r², which is the oscillator V₋ with
// ω = 4B, ℓ(ℓ−1) = 4(A²−E) − 1/4, shifted by ω(ℓ + 1/2) − 4B(2A+1).
#[test]
fn morse_to_oscillator_offset_matches_hand_derivation() {
    for (a, b, e) in [(5.0, 1.0, 0.0), (5.0, 1.0, 16.0), (2.5, 0.4, 1.1)] {
        let r = verify_pct_edge("T_ab", &Bindings::from_pairs(&[("A", a), ("B", b)]), None, e, 80).unwrap();
        let omega = 4.0 * b;
        let l = 0.5 + 2.0 * (a * a - e).sqrt();
        let offset = -4.0 * b * (2.0 * a + 1.0) + omega * (l + 0.5);
        assert!(r.pass);
        assert!((r.offset.0 - offset).abs() < 1e-9 * (1.0 + offset.abs()), "{r:?} vs {offset}");
    }
}

#[test]
fn type_ii_cycle_closes() {
    // Going around T_ab, T_bc, T_ca at the ground state returns Morse parameters
    // that differ from the start only by the cycle's scaling.
    let r1 = verify_pct_edge("T_ab", &Bindings::from_pairs(&[("A", 3.0), ("B", 1.0)]), None, 0.0, 64).unwrap();
    let osc: Vec<(&str, f64)> =
        r1.target_params.iter().filter(|(k, _)| k.as_str() != "hbar").map(|(k, v)| (k.as_str(), v.0)).collect();
    let r2 = verify_pct_edge("T_bc", &Bindings::from_pairs(&osc), None, 0.0, 64).unwrap();
    let cou: Vec<(&str, f64)> =
        r2.target_params.iter().filter(|(k, _)| k.as_str() != "hbar").map(|(k, v)| (k.as_str(), v.0)).collect();
    let r3 = verify_pct_edge("T_ca", &Bindings::from_pairs(&cou), None, 0.0, 64).unwrap();
    assert!(r1.pass && r2.pass && r3.pass);
    assert!(r3.target_params["A"].0 > 0.0 && r3.target_params["B"].0 > 0.0);
}

#[test]
fn projection_energies_agree_at_every_step_for_scarf_to_morse() {
    let r = verify_projection("P_1a", None, None).unwrap();
    for step in &r.steps {
        for c in &step.energies {
            assert_eq!(c.error, 0.0, "{c:?}");
        }
    }
}
