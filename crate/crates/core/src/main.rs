use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = posmap::cli::run_args(std::env::args_os());
    // A closed pipe downstream is not an error of ours.
    if let Some(s) = &out.stdout {
        let _ = writeln!(std::io::stdout(), "{s}");
    }
    if let Some(e) = &out.stderr {
        let _ = writeln!(std::io::stderr(), "posmap: {e}");
    }
    ExitCode::from(out.code as u8)
}
