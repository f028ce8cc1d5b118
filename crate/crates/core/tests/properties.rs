use loanmix_core::{
    probe_fixed_points, reference, solve_fixed_point, solve_with_utility, ChoiceContext,
    EconomyParams, Education, LoanTerms, NoiseSpec, Regime, Scaled, SolverOptions, UtilitySpec,
};
use proptest::prelude::*;

const WAGE: f64 = 1.5;

fn family() -> impl Strategy<Value = UtilitySpec> {
    prop_oneof![
        (0.5..4.0f64).prop_map(|gamma| UtilitySpec::Crra { gamma }),
        (0.1..2.0f64).prop_map(|lambda| UtilitySpec::Cara { lambda }),
        Just(reference::QUADRATIC),
    ]
}

fn with_utility(u: UtilitySpec) -> EconomyParams {
    reference::quadratic().with_utility(u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noise_laws_have_zero_mean_and_sigma_variance(sigma in 0.0..2.0f64, n in 2usize..40) {
        for spec in [NoiseSpec::two_point(sigma), NoiseSpec::gauss_hermite(n, sigma)] {
            let nodes = spec.nodes().unwrap();
            let mass: f64 = nodes.iter().map(|e| e.weight).sum();
            let mean: f64 = nodes.iter().map(|e| e.weight * e.eps).sum();
            let var: f64 = nodes.iter().map(|e| e.weight * e.eps * e.eps).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
            prop_assert!(mean.abs() < 1e-12);
            prop_assert!((var - sigma * sigma).abs() < 1e-10 * (1.0 + sigma * sigma));
        }
    }

    #[test]
    fn consumption_is_affine_in_share(
        y in 1.0..2.2f64, eps in -0.9..0.9f64, abar in 1.0..2.2f64, t in 0.0..1.0f64,
    ) {
        let p = with_utility(UtilitySpec::Cara { lambda: 0.5 });
        let terms = LoanTerms { pool_mean: abar, wage: WAGE };
        let c = |theta| p.consumption(Education::Higher, y, eps, theta, terms).unwrap();
        let mixed = (1.0 - t) * c(0.0) + t * c(1.0);
        prop_assert!((c(t) - mixed).abs() < 1e-12 * (1.0 + mixed.abs()));
        let slope = c(1.0) - c(0.0);
        let expected = reference::INTEREST_RATE * ((y + eps) / abar - 1.0);
        prop_assert!((slope - expected).abs() < 1e-12);
        let basic = p.consumption(Education::Basic, y, eps, t, terms).unwrap();
        prop_assert_eq!(basic, reference::BASIC_CAPITAL * WAGE);
    }

    #[test]
    fn expected_utility_is_concave_in_share(
        u in family(), y in 1.0..2.2f64, abar in 1.1..2.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64,
    ) {
        let p = with_utility(u);
        let ctx = ChoiceContext::new(&p, abar, WAGE).unwrap();
        let eu = |t| ctx.expected_utility(y, t).unwrap();
        let mid = eu(0.5 * (a + b));
        prop_assert!(mid >= 0.5 * (eu(a) + eu(b)) - 1e-12 * (1.0 + mid.abs()));
    }

    #[test]
    fn optimal_share_beats_any_other(
        u in family(), y in 1.0..2.2f64, abar in 1.1..2.0f64, t in 0.0..1.0f64,
    ) {
        let p = with_utility(u);
        let ctx = ChoiceContext::new(&p, abar, WAGE).unwrap();
        let best = ctx.optimal_share(y).unwrap().theta;
        prop_assert!((0.0..=1.0).contains(&best));
        let at_best = ctx.expected_utility(y, best).unwrap();
        prop_assert!(at_best >= ctx.expected_utility(y, t).unwrap() - 1e-12 * (1.0 + at_best.abs()));
    }

    /// Groups whose expected ability does not exceed the pool mean gain
    /// nothing from the fixed repayment and stay fully in ICL.
    #[test]
    fn signals_at_or_below_pool_mean_hold_icl(u in family(), abar in 1.0..2.2f64, s in 0.0..1.0f64) {
        let p = with_utility(u);
        let ctx = ChoiceContext::new(&p, abar, WAGE).unwrap();
        let y = 1.0 + s * (abar - 1.0);
        prop_assert_eq!(ctx.optimal_share(y).unwrap().theta, 0.0);
    }

    /// A higher signal shifts the ability distribution up, so the CML
    /// share never falls with it under CRRA or CARA.
    #[test]
    fn share_is_nondecreasing_in_signal(
        u in prop_oneof![
            (0.5..4.0f64).prop_map(|gamma| UtilitySpec::Crra { gamma }),
            (0.1..2.0f64).prop_map(|lambda| UtilitySpec::Cara { lambda }),
        ],
        abar in 1.1..2.0f64, y in 1.0..2.1f64, dy in 0.0..0.1f64,
    ) {
        let p = with_utility(u);
        let ctx = ChoiceContext::new(&p, abar, WAGE).unwrap();
        let lo = ctx.optimal_share(y).unwrap().theta;
        let hi = ctx.optimal_share(y + dy).unwrap().theta;
        prop_assert!(hi >= lo - 1e-10, "theta({}) = {} > theta({}) = {}", y, lo, y + dy, hi);
    }

    /// More basic capital raises absolute risk aversion under quadratic
    /// utility, which lowers the demand for the safe-for-the-lender CML.
    #[test]
    fn quadratic_share_falls_with_basic_capital(
        abar in 1.1..1.6f64, y in 1.0..2.2f64, a in 1.5..2.5f64, da in 0.0..0.5f64,
    ) {
        let low = reference::quadratic().with_basic_capital(a).unwrap();
        let high = reference::quadratic().with_basic_capital(a + da).unwrap();
        let t_low = ChoiceContext::new(&low, abar, WAGE).unwrap().optimal_share(y).unwrap().theta;
        let t_high = ChoiceContext::new(&high, abar, WAGE).unwrap().optimal_share(y).unwrap().theta;
        prop_assert!(t_high <= t_low + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rescaled_utility_leaves_equilibrium_unchanged(factor in 0.01..100.0f64) {
        for (name, p) in reference::all() {
            let base = solve_fixed_point(Regime::Portfolio, &p).unwrap();
            let scaled = Scaled::new(*p.utility(), factor).unwrap();
            let eq = solve_with_utility(Regime::Portfolio, &p, &SolverOptions::default(), &scaled)
                .unwrap();
            prop_assert!((eq.pool_mean - base.pool_mean).abs() < 1e-10, "{}", name);
        }
    }
}

/// The portfolio map is continuous and crosses once. The FDE map is a
/// staircase, so neighbouring cutoffs can both be self-consistent; their
/// pool means then differ by at most one step of the ICL-node average.
#[test]
fn reference_fixed_points_are_unique_up_to_grid_step() {
    for (name, p) in reference::all() {
        let pr = probe_fixed_points(Regime::Portfolio, &p, &SolverOptions::default()).unwrap();
        assert_eq!(pr.len(), 1, "{name}: {:?}", pr.iter().map(|e| e.pool_mean).collect::<Vec<_>>());
        let fde =
            probe_fixed_points(Regime::FundingDiversity, &p, &SolverOptions::default()).unwrap();
        let means: Vec<f64> = fde.iter().map(|e| e.pool_mean).collect();
        let spread = means.iter().cloned().fold(f64::MIN, f64::max)
            - means.iter().cloned().fold(f64::MAX, f64::min);
        let step = (reference::SIGNAL_UPPER - reference::SIGNAL_LOWER)
            / (reference::GRID_NODES - 1) as f64;
        assert!(spread <= 0.5 * step + 1e-12, "{name}: {means:?}");
    }
}
