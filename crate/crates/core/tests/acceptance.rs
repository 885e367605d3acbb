use std::process::ExitCode;

use graph_schro::verify::{run_all, VerifyConfig};

fn main() -> ExitCode {
    let report = run_all(&VerifyConfig::default());
    for o in &report.outcomes {
        println!("{o}");
    }
    let failed: Vec<_> = report.outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: {}/{} passed", report.outcomes.len(), report.outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed checks {failed:?}");
        ExitCode::FAILURE
    }
}
