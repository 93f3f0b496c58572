//! A small convex benchmark sweep with a per-dimension summary, the same
//! rows `ellipdist benchmark` writes.

use ellipsoid_distance::cli::{benchmark_rows, records_to_csv, summarize, ProtocolArg, SolverFlags, SolverKind};

fn main() {
    let rows = benchmark_rows(
        ProtocolArg::Convex,
        &[10, 20, 30],
        5,
        0,
        &[SolverKind::Admm, SolverKind::SaAdmm],
        &SolverFlags::default(),
    );
    print!("{}", records_to_csv(&rows).expect("rows serialize"));
    println!();
    for s in summarize(&rows) {
        println!(
            "d {:>3}  {:<8} converged {}/{}  mean iterations {:>7.1}  time {:.3}s",
            s.d, s.solver, s.converged, s.instances, s.mean_iterations, s.total_wall_time
        );
    }
}
