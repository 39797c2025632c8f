use std::collections::BTreeMap;

use homocycle::catalog;
use homocycle::census::{census, CensusConfig};
use homocycle::expansion::{a_from_factor, c1_of_alpha, expansion_report, factor_m, Mode};
use homocycle::graph::{apply_basis, change_of_basis, homology_labeling, oriented_double, parse_graph, HomologyLabeling};
use homocycle::report::{cmd_census, from_json, to_json, AnalysisConfig, CensusReport, Pipeline};
use homocycle::surd::Surd;
use homocycle::thermo::{solve_beta, thermodynamics};
use homocycle::transfer::TransferSystem;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn surd() -> impl Strategy<Value = Surd> {
    [rational(), rational(), rational(), rational()].prop_map(Surd::from_linear)
}

fn positive_length() -> impl Strategy<Value = Surd> {
    (1i64..40, 1i64..8, 0i64..3).prop_map(|(n, d, r)| {
        let q = Surd::from_rational(BigRational::new(n.into(), d.into()));
        match r {
            0 => q,
            1 => &q + &Surd::sqrt_of(2).unwrap(),
            _ => &q + &Surd::sqrt_of(5).unwrap(),
        }
    })
}

fn length() -> impl Strategy<Value = f64> {
    0.5f64..2.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn surd_field_laws(a in surd(), b in surd(), c in surd()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if let Some(inv) = a.inverse() {
            prop_assert_eq!(&a * &inv, Surd::from_integer(1));
        } else {
            prop_assert!(a.is_zero());
        }
        let gap = a.to_f64() - b.to_f64();
        if gap.abs() > 1e-9 {
            prop_assert_eq!(a.cmp(&b), gap.partial_cmp(&0.0).unwrap());
        }
    }

    #[test]
    fn surd_floor_brackets(a in surd()) {
        let f = Surd::from_bigint(&a.floor());
        prop_assert!(f <= a);
        prop_assert!(a < &f + &Surd::from_integer(1));
    }

    #[test]
    fn graph_documents_round_trip(ls in [positive_length(), positive_length(), positive_length(), positive_length()]) {
        let g = catalog::figure_one_exact(ls);
        let doc = g.to_document();
        let back = parse_graph(&doc).unwrap();
        prop_assert_eq!(back.to_document(), doc);
        for (x, y) in g.edges().iter().zip(back.edges()) {
            prop_assert_eq!(&x.length, &y.length);
        }
    }

    #[test]
    fn beta_is_even(l in [length(), length(), length()], u0 in -0.5f64..0.5, u1 in -0.5f64..0.5) {
        let g = catalog::two_loop(l);
        let st = oriented_double(&g);
        let hl = homology_labeling(&g, &st).unwrap();
        let sys = TransferSystem::new(&st, &hl).unwrap();
        let plus = solve_beta(&sys, &[u0, u1]).unwrap();
        let minus = solve_beta(&sys, &[-u0, -u1]).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-10);
    }

    #[test]
    fn c1_is_even(l in [length(), length(), length(), length()], a0 in -6i64..6, a1 in -6i64..6) {
        let g = catalog::figure_one(l);
        let st = oriented_double(&g);
        let hl = homology_labeling(&g, &st).unwrap();
        let tp = thermodynamics(&TransferSystem::new(&st, &hl).unwrap()).unwrap().profile;
        for mode in Mode::ALL {
            let rep = expansion_report(&tp, mode).unwrap();
            prop_assert_eq!(c1_of_alpha(&rep, &[a0, a1]).unwrap(), c1_of_alpha(&rep, &[-a0, -a1]).unwrap());
        }
    }

    #[test]
    fn a_ignores_rotations(x in 0.2f64..2.0, y in 0.2f64..2.0, r in -0.9f64..0.9, h in 0.3f64..3.0, t in 0.0f64..std::f64::consts::TAU) {
        let off = r * (x * y).sqrt();
        let hess = DMatrix::from_row_slice(2, 2, &[x, off, off, y]);
        let m = factor_m(&hess).unwrap();
        let q = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        for mode in Mode::ALL {
            let a = a_from_factor(&m, h, mode);
            let b = a_from_factor(&(&m * &q), h, mode);
            prop_assert!((&a - &b).amax() <= 1e-9 * a.amax());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn census_ignores_labeling_basis(ls in [positive_length(), positive_length(), positive_length(), positive_length()], tree in 0usize..3) {
        let g = catalog::figure_one_exact(ls);
        let st = oriented_double(&g);
        let base = homology_labeling(&g, &st).unwrap();
        let trees = [[1, 2], [1, 3], [2, 3]];
        let other = HomologyLabeling::with_tree(&g, &st, &trees[tree]).unwrap();
        let u = change_of_basis(&g, &base, &other);
        let config = CensusConfig { n_max: 7, ..CensusConfig::default() };
        let a = census(&st, &base, &config).unwrap();
        let b = census(&st, &other, &config).unwrap();
        for (la, lb) in a.orbits.unwrap().iter().zip(b.orbits.as_ref().unwrap()) {
            let mapped: BTreeMap<_, _> = la.iter().map(|((c, us), n)| ((apply_basis(&u, c), us.clone()), n.clone())).collect();
            prop_assert_eq!(&mapped, lb);
        }
    }

    #[test]
    fn census_reports_round_trip(l in [length(), length()]) {
        let p = Pipeline::from_graph(catalog::rose(&l)).unwrap();
        let config = AnalysisConfig { t_grid: vec![2.0, 3.5], alpha_radius: 2, ..AnalysisConfig::default() };
        let rep = cmd_census(&p, &config).unwrap();
        for row in &rep.rows {
            let neg = rep.rows.iter().find(|r| r.t == row.t && r.alpha == row.alpha.negated()).unwrap();
            prop_assert_eq!(&neg.count, &row.count);
        }
        let text = to_json(&rep).unwrap();
        let back: CensusReport = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
    }
}
