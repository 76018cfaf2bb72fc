use random_rates::verify::{estimate_padding, estimate_separation, exact_separation_small, hoeffding_radius};
use random_rates::{MetricSpace, TerminalSet};

const TRIALS: u64 = 10_000;
const CONF: f64 = 1e-3;

fn table(rows: &[&[f64]]) -> MetricSpace {
    MetricSpace::from_distance_matrix(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), true).unwrap()
}

#[test]
fn scaled_path_separation_matches_oracle() {
    let m = table(&[&[0.0, 4.0, 8.0, 12.0], &[4.0, 0.0, 4.0, 8.0], &[8.0, 4.0, 0.0, 4.0], &[12.0, 8.0, 4.0, 0.0]]);
    let t = TerminalSet::new(&m, &[0, 3]).unwrap();
    let exact = exact_separation_small(&m, &t, (1, 2), 2000).unwrap();
    let r = estimate_separation(&m, &t, &[(1, 2)], TRIALS, CONF, 11).unwrap();
    let tol = 3.0 * hoeffding_radius(TRIALS, CONF) + exact.error_bound;
    assert!((r.pairs[0].p_hat - exact.value).abs() <= tol);
}

#[test]
fn symmetric_four_point_separation_matches_oracle() {
    // Terminals 0 and 3; u = 1 and v = 2 at distance 2 apart, each at distance 1
    // from its own terminal and 1.5 from the other one.
    let m = table(&[&[0.0, 1.0, 1.5, 2.0], &[1.0, 0.0, 2.0, 1.5], &[1.5, 2.0, 0.0, 1.0], &[2.0, 1.5, 1.0, 0.0]]);
    let t = TerminalSet::new(&m, &[0, 3]).unwrap();
    let exact = exact_separation_small(&m, &t, (1, 2), 2000).unwrap();
    assert!(exact.value > 0.5 && exact.value < 1.0, "{exact:?}");
    let r = estimate_separation(&m, &t, &[(1, 2)], TRIALS, CONF, 12).unwrap();
    let tol = 3.0 * hoeffding_radius(TRIALS, CONF) + exact.error_bound;
    assert!((r.pairs[0].p_hat - exact.value).abs() <= tol, "{} vs {exact:?}", r.pairs[0].p_hat);
}

#[test]
fn two_point_ball_padding_matches_oracle() {
    // Line 0 -4- 1 -1- 2 -5- 3 with terminals {0, 3}; the ball of radius 1
    // around 1 is {1, 2}, so it is cut exactly when 1 and 2 are separated.
    let m = table(&[&[0.0, 4.0, 5.0, 10.0], &[4.0, 0.0, 1.0, 6.0], &[5.0, 1.0, 0.0, 5.0], &[10.0, 6.0, 5.0, 0.0]]);
    let t = TerminalSet::new(&m, &[0, 3]).unwrap();
    let exact = exact_separation_small(&m, &t, (1, 2), 2000).unwrap();
    assert!(exact.value > 0.0 && exact.value < 1.0, "{exact:?}");
    let r = estimate_padding(&m, &t, 1, &[1.0], TRIALS, CONF, 13).unwrap();
    let tol = 3.0 * r[0].eps_n + exact.error_bound + 1e-3;
    assert!((r[0].p_hat - exact.value).abs() <= tol, "{} vs {exact:?}", r[0].p_hat);
}
