use relqkd_core::config::SweepConfig;
use relqkd_core::sweep::{run_sweep, RowStatus};

fn sweep(text: &str) -> relqkd_core::sweep::SweepTable {
    run_sweep(&SweepConfig::from_toml(text, &[]).unwrap(), 4).unwrap()
}

#[test]
fn engines_agree_where_the_reduction_is_valid() {
    let t = sweep(
        r#"
[grid]
T = { from = 0.5, to = 40, steps = 6, log = true }
k_so = [-5, -10]
eta = 0.9
V_A = 10

[source]
sigma_rel = 0.1

[engine]
kind = "both"
"#,
    );
    let valid: Vec<_> = t.rows.iter().filter(|r| r.validity == "nb+dr+px+").collect();
    assert!(!valid.is_empty());
    for r in valid {
        assert_eq!(r.status, RowStatus::Ok);
        assert!(r.discrepancy.unwrap() < 0.05, "{r:?}");
    }
}

#[test]
fn engines_agree_for_wide_pulses_at_moderate_kappa() {
    let t = sweep(
        r#"
[grid]
T = [0.01, 0.02, 0.05]
k_so = -10
eta = [0.8, 1.0]
V_A = 10

[source]
sigma_t = 10

[engine]
kind = "both"
"#,
    );
    for r in &t.rows {
        let (g, g_num) = (r.gain.unwrap(), r.gain_numeric.unwrap());
        assert!((g_num / g - 1.0).abs() < 5e-3, "{r:?}");
        assert!(r.discrepancy.unwrap() < 0.05, "{r:?}");
    }
}

#[test]
fn key_rate_monotone_over_dense_grid() {
    let t = sweep(
        r#"
[grid]
T = { from = 1e-3, to = 10, steps = 1000, log = true }
k_so = -1
eta = 0.9
V_A = 10
"#,
    );
    assert_eq!(t.rows.len(), 1000);
    let ks: Vec<f64> = t.rows.iter().map(|r| r.key_rate.unwrap()).collect();
    for w in ks.windows(2) {
        // flat to rounding once G = 1 in double precision
        assert!(w[1] >= w[0] - 1e-12, "{} < {}", w[1], w[0]);
    }
    assert_eq!(ks[0], 0.0);
    assert!(*ks.last().unwrap() > 0.0);
}
