use std::process::ExitCode;

fn main() -> ExitCode {
    let code = powerkg::app::main_with(std::env::args(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
