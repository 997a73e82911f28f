//! Every example builds and runs to completion.

mod graph_families {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/graph_families.rs"));
}

mod field_arithmetic {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/field_arithmetic.rs"));
}

mod network_coding {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/network_coding.rs"));
}

mod fwr_bounds {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fwr_bounds.rs"));
}

mod tree_bound {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tree_bound.rs"));
}

mod growth_curve {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/growth_curve.rs"));
}

mod tail_probability {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tail_probability.rs"));
}

mod hierarchy_demo {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hierarchy_demo.rs"));
}

mod trace_dump {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/trace_dump.rs"));
}

mod monte_carlo {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/monte_carlo.rs"));
}

mod config_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_file.rs"));
}

mod verify_battery {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/verify_battery.rs"));
}

#[test]
fn graph_families_runs() {
    graph_families::run_example().expect("graph_families example");
}

#[test]
fn field_arithmetic_runs() {
    field_arithmetic::run_example().expect("field_arithmetic example");
}

#[test]
fn network_coding_runs() {
    network_coding::run_example().expect("network_coding example");
}

#[test]
fn fwr_bounds_runs() {
    fwr_bounds::run_example().expect("fwr_bounds example");
}

#[test]
fn tree_bound_runs() {
    tree_bound::run_example().expect("tree_bound example");
}

#[test]
fn growth_curve_runs() {
    growth_curve::run_example().expect("growth_curve example");
}

#[test]
fn tail_probability_runs() {
    tail_probability::run_example().expect("tail_probability example");
}

#[test]
fn hierarchy_demo_runs() {
    hierarchy_demo::run_example().expect("hierarchy_demo example");
}

#[test]
fn trace_dump_runs() {
    trace_dump::run_example().expect("trace_dump example");
}

#[test]
fn monte_carlo_runs() {
    monte_carlo::run_example().expect("monte_carlo example");
}

#[test]
fn config_file_runs() {
    config_file::run_example().expect("config_file example");
}

#[test]
fn verify_battery_runs() {
    verify_battery::run_example().expect("verify_battery example");
}
