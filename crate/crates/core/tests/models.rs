use mixtilt::math::{cholesky, CovMatrix};
use mixtilt::models::{
    AsianCall, AsianSpec, CevDigital, CevSpec, Model, PyramidCall, PyramidSpec, Rainbow,
    RainbowSpec, TwoSidedTail, TwoSidedTailSpec,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn corr4() -> CovMatrix {
    CovMatrix::new(vec![
        vec![1.0, 0.3, -0.2, 0.4],
        vec![0.3, 1.0, -0.3, 0.1],
        vec![-0.2, -0.3, 1.0, 0.5],
        vec![0.4, 0.1, 0.5, 1.0],
    ])
    .unwrap()
}

fn rainbow4(strike: f64) -> Rainbow {
    Rainbow::new(RainbowSpec {
        s0: vec![45.0, 50.0, 47.0, 50.0],
        sigma: vec![0.1, 0.1, 0.2, 0.2],
        corr: corr4(),
        r: 0.02,
        maturity: 0.5,
        strike,
    })
    .unwrap()
}

fn all_models() -> Vec<Box<dyn Model>> {
    vec![
        Box::new(TwoSidedTail::new(TwoSidedTailSpec { a: 2.0, b: -2.5 }).unwrap()),
        Box::new(AsianCall::new(AsianSpec::uniform(50.0, 0.05, 0.3, 1.0, 4, 55.0)).unwrap()),
        Box::new(rainbow4(55.0)),
        Box::new(
            PyramidCall::new(PyramidSpec {
                s0: vec![50.0, 45.0, 45.0, 30.0],
                sigma: vec![0.15, 0.15, 0.2, 0.2],
                asset_strikes: vec![55.0, 50.0, 50.0, 35.0],
                corr: corr4(),
                r: 0.03,
                maturity: 1.0,
                strike: 30.0,
                discount: true,
            })
            .unwrap(),
        ),
        Box::new(
            CevDigital::new(CevSpec {
                s0: 50.0,
                h0: 48.0,
                sigma1: 0.3,
                sigma2: 0.35,
                gamma1: 0.5,
                gamma2: 0.7,
                rho: 0.3,
                r: 0.03,
                maturity: 1.0,
                strike: 60.0,
                c1: 1.0,
                c2: 1.0,
                steps: 2,
                discount: true,
            })
            .unwrap(),
        ),
    ]
}

proptest! {
    #[test]
    fn payoffs_are_finite_and_nonnegative(x in vec(-8.0f64..8.0, 4)) {
        for m in all_models() {
            let v = m.payoff(&x[..m.dim()]);
            prop_assert!(v.is_finite() && v >= 0.0, "{} at {x:?}: {v}", m.name());
        }
    }

    #[test]
    fn asian_is_monotone_in_every_innovation(x in vec(-3.0f64..3.0, 4), step in vec(0.0f64..1.0, 4)) {
        let m = AsianCall::new(AsianSpec::uniform(50.0, 0.05, 0.3, 1.0, 4, 50.0)).unwrap();
        let y: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        prop_assert!(m.payoff(&y) >= m.payoff(&x));
    }

    #[test]
    fn rainbow_is_monotone_when_every_asset_rises(x in vec(-3.0f64..3.0, 4), eta in vec(0.0f64..1.0, 4)) {
        let m = rainbow4(50.0);
        // C⁻¹η moves every (Cx)_j up by η_j
        let dir = cholesky(&corr4()).unwrap().solve(&eta).unwrap();
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
        prop_assert!(m.payoff(&y) >= m.payoff(&x) - 1e-12);
    }

    #[test]
    fn two_sided_embedding_decreases_in_delta(x in -5.0f64..5.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let m = TwoSidedTail::new(TwoSidedTailSpec { a: 1.0, b: -1.5 }).unwrap();
        let emb = m.rarity().unwrap();
        prop_assert!(emb.payoff_delta(&[d1, d2], &[x]) >= emb.payoff_delta(&[d1 + e1, d2 + e2], &[x]));
        prop_assert_eq!(emb.payoff_delta(&[1.0, 1.0], &[x]), m.payoff(&[x]));
    }
}

#[test]
fn absorbed_cev_paths_never_revive() {
    let m = CevDigital::new(CevSpec {
        s0: 1.0,
        h0: 1.0,
        sigma1: 2.0,
        sigma2: 2.0,
        gamma1: 0.5,
        gamma2: 0.5,
        rho: 0.0,
        r: 0.0,
        maturity: 1.0,
        strike: 1.0,
        c1: 1.0,
        c2: 1.0,
        steps: 10,
        discount: true,
    })
    .unwrap();
    // a large negative shock at step k, then large positive ones
    for k in 0..10 {
        let mut x = vec![3.0; 20];
        x[2 * k] = -40.0;
        x[2 * k + 1] = -40.0;
        assert_eq!(m.paths(&x).unwrap(), (0.0, 0.0), "step {k}");
    }
}
