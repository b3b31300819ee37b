use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match dealerfield::run(std::env::args_os(), &mut stdout) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dealerfield: {e}");
            ExitCode::from(2)
        }
    }
}
