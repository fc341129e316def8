//! CSV write/read round trips and row counts.

use dat_core::simulator::integrate;
use dat_sim::trajectory::header;
use dat_sim::{parse_scenario, Table};

const SCENARIO: &str = r#"{
    "seed": 9,
    "graph": {"family": "ring", "n": 4},
    "dim": 2,
    "variant": "lipschitz",
    "dynamics": {"kind": "pendulum", "params": {"a": 1.0, "b": 0.5}, "rho1": 1.0, "rho2": 0.5},
    "gains": {"kappa": 2.0, "alpha": 3.5, "gamma": 0.5, "eta": 1.5},
    "integrator": {"duration": 1.0, "signum": {"mode": "smoothed"}}
}"#;

fn bounded_scenario(duration: &str) -> String {
    format!(
        r#"{{
        "seed": 9,
        "graph": {{"family": "star", "n": 5}},
        "dim": 1,
        "variant": "bounded",
        "dynamics": {{"kind": "bounded_wave", "params": {{"c": 0.4, "d": 0.6, "omega": 1.0}}, "fbar": 1.0}},
        "gains": {{"alpha": 30.0, "eta": 5.0, "acknowledged": true}},
        "integrator": {{"duration": {duration}}}
    }}"#
    )
}

#[test]
fn write_read_write_is_byte_identical() {
    for text in [SCENARIO.to_owned(), bounded_scenario("1.0")] {
        let cfg = parse_scenario(&text).unwrap();
        let log = integrate(&cfg.problem);
        let table = Table::from_log(&log);
        let bytes = table.to_bytes();
        let back = Table::read(bytes.as_slice()).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.header, header(log.n, log.dim));
        for (row, orig) in back.rows.iter().zip(&table.rows) {
            for (a, b) in row.iter().zip(orig) {
                assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}

#[test]
fn thousand_steps_give_hundred_and_one_rows() {
    let cfg = parse_scenario(SCENARIO).unwrap();
    let table = Table::from_log(&integrate(&cfg.problem));
    assert_eq!(table.rows.len(), 101);
    assert_eq!(table.rows[0][0], 0.0);
    assert_eq!(table.rows[100][0], 1.0);
}

#[test]
fn zero_duration_gives_one_row() {
    let cfg = parse_scenario(&bounded_scenario("0.0")).unwrap();
    let bytes = Table::from_log(&integrate(&cfg.problem)).to_bytes();
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 2);
    // V1 is undefined for the bounded variant
    assert!(text.lines().nth(1).unwrap().contains(",NaN,"));
}

#[test]
fn malformed_numbers_are_rejected() {
    assert!(Table::read("t,V1\n0.0,abc\n".as_bytes()).is_err());
}
