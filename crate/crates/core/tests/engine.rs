use selfish_bandit::environments::{bernoulli_sequence, lower_bound_sequence};
use selfish_bandit::learners::{exp3_default_eta, LearnerKind};
use selfish_bandit::simlab::{monte_carlo, observation_floor, run_trials};
use selfish_bandit::HyperParams;

fn nontrivial(t: u64) -> HyperParams {
    let tf = t as f64;
    HyperParams::new(tf.powf(-2.0 / 3.0), tf.powf(-1.0 / 3.0), 2, t)
}

#[test]
fn structural_invariants_on_lower_bound_runs() {
    let t = 10_000;
    let m = lower_bound_sequence(t).unwrap();
    let runs = run_trials(LearnerKind::WsuUx, &m, &nontrivial(t), 100, 2024, 1).unwrap();
    for tr in &runs {
        assert!(tr.audit.max_sum_deviation <= 1e-9);
        assert!(tr.audit.min_pre_repair >= -1e-12);
        assert!(tr.audit.rel_loss_min >= -1.0 && tr.audit.rel_loss_max <= 0.5);
        assert_eq!(tr.audit.phase2_decreases, 0);
        assert!(tr.ln_pi_final >= observation_floor(t));
    }
}

#[test]
fn one_step_recursion_holds_on_average() {
    // Late in phase 2 the residual is a rare large jump against a small
    // drift; enough trials are needed for the jumps to be well represented.
    let t = 5_000;
    let m = lower_bound_sequence(t).unwrap();
    let stats = monte_carlo(LearnerKind::WsuUx, &m, &nontrivial(t), 3000, 7, 1).unwrap();
    assert_eq!(stats.probes.len(), 10);
    for p in &stats.probes {
        let r = p.residual;
        assert!(r.mean.abs() <= 4.0 * r.se + 1e-15, "t = {}: {} vs SE {}", p.t, r.mean, r.se);
    }
}

#[test]
fn exp3_on_bernoulli_arms_is_sublinear() {
    let mean_regret = |t: u64| {
        let m = bernoulli_sequence(t, [0.1, 0.9], 17).unwrap();
        let p = HyperParams::new(exp3_default_eta(2, t), 0.0, 2, t);
        monte_carlo(LearnerKind::Exp3, &m, &p, 20, 5, 1).unwrap().pseudo_regret.mean
    };
    let (small, large) = (mean_regret(2_000), mean_regret(32_000));
    assert!(small > 0.0);
    // Linear growth would give a ratio of 16.
    assert!(large / small < 8.0, "{small} -> {large}");
}

#[test]
fn runs_repeat_exactly() {
    let t = 3_000;
    let m = lower_bound_sequence(t).unwrap();
    let a = run_trials(LearnerKind::WsuUx, &m, &nontrivial(t), 6, 99, 1).unwrap();
    let b = run_trials(LearnerKind::WsuUx, &m, &nontrivial(t), 6, 99, 3).unwrap();
    assert_eq!(a, b);
    let seeds: std::collections::HashSet<u64> = a.iter().map(|t| t.stream_seed).collect();
    assert_eq!(seeds.len(), 6);
}
