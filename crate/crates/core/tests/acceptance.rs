use relqkd_core::acceptance::*;

fn run(report: CriterionReport) {
    println!("{report}");
    assert!(report.passed, "criterion {} failed", report.id);
}

#[test]
fn criterion_1_gain_formula() {
    run(criterion_1());
}

#[test]
fn criterion_2_amplifier_identity() {
    run(criterion_2());
}

#[test]
fn criterion_3_numeric_vs_closed_form() {
    run(criterion_3());
}

#[test]
fn criterion_4_proper_time_crosscheck() {
    run(criterion_4());
}

#[test]
fn criterion_5_kinematics() {
    run(criterion_5());
}

#[test]
fn criterion_6_bogoliubov() {
    run(criterion_6());
}

#[test]
fn criterion_7_gaussian_engine() {
    run(criterion_7());
}

#[test]
fn criterion_8_key_rate_shape() {
    run(criterion_8());
}

#[test]
fn criterion_9_determinism() {
    run(criterion_9());
}
