//! `ellchain`: verification suites, chain builder and hybrid integrator on the command line.
//!
//! Exit codes: 0 every check passed, 1 residual breach, 2 usage error (no report),
//! 3 pole or degeneracy.

mod args;
mod commands;
mod parse;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ellchain::Error;

use args::{ChainCommand, Cli, Command, Format, HybridCommand};
use commands::{Failure, HybridArgs};
use report::Report;

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ThetaCheck { .. } => "theta-check",
        Command::RmatrixVerify { .. } => "rmatrix-verify",
        Command::OpsVerify { .. } => "ops-verify",
        Command::Equilibrium { .. } => "equilibrium",
        Command::Chain(ChainCommand::Build { .. }) => "chain build",
        Command::Chain(ChainCommand::Verify { .. }) => "chain verify",
        Command::Chain(ChainCommand::Spectrum { .. }) => "chain spectrum",
        Command::Hybrid(HybridCommand::Evolve { .. }) => "hybrid evolve",
    }
}

fn run(cli: &Cli, rep: &mut Report) -> Result<Option<String>, Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::ThetaCheck { samples } => commands::theta_check(rep, cli.seed, *samples)?,
        Command::RmatrixVerify { kind, r, samples } => {
            commands::rmatrix_verify(rep, cli.seed, *kind, *r, *samples)?
        }
        Command::OpsVerify {
            case,
            n,
            r,
            pairs,
            samples,
        } => commands::ops_verify(rep, cli.seed, *case, *n, *r, pairs.as_deref(), *samples)?,
        Command::Equilibrium { family } => commands::equilibrium(rep, family, cli.tol)?,
        Command::Chain(ChainCommand::Build {
            kind,
            r,
            family,
            n_range,
            oracle,
        }) => commands::chain_build(
            rep,
            cli.seed,
            *kind,
            *r,
            family,
            n_range.as_deref(),
            *oracle,
            out,
            cli.format,
        )?,
        Command::Chain(ChainCommand::Verify { dir }) => commands::chain_verify(rep, cli.seed, dir)?,
        Command::Chain(ChainCommand::Spectrum { dir, n }) => {
            let ev = commands::chain_spectrum(rep, dir, n, cli.tol)?;
            if cli.format == Format::Csv {
                let mut s = String::from("re,im\n");
                ev.iter()
                    .for_each(|z| s.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im)));
                return Ok(Some(s));
            }
        }
        Command::Hybrid(HybridCommand::Evolve {
            kind,
            r,
            family,
            x0,
            p0,
            t_end,
            dt,
            sample_every,
            observable,
            site,
            state,
        }) => {
            let a = HybridArgs {
                kind: *kind,
                r: *r,
                family,
                x0: x0.as_deref(),
                p0: p0.as_deref(),
                t_end: *t_end,
                dt: *dt,
                sample_every: *sample_every,
                observable: *observable,
                site: *site,
                state: *state,
            };
            commands::hybrid_evolve(rep, &a, out)?
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    let argv = match args::merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.format == Format::Bin
        && !matches!(cli.command, Command::Chain(ChainCommand::Build { .. }))
    {
        eprintln!("error: --format bin only applies to chain build");
        return ExitCode::from(2);
    }
    let params = serde_json::to_value(&cli).expect("arguments serialise");
    let mut rep = Report::new(command_name(&cli.command), params);
    let result = run(&cli, &mut rep);
    rep.override_tolerance(cli.tol);
    let (code, text) = match result {
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Lib(e @ (Error::InvalidInput(_) | Error::Dimension(_)))) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Lib(e)) => {
            let code = if e.is_numerical() { 3 } else { 1 };
            rep.error = Some(e.to_string());
            (code, None)
        }
        Ok(text) => (if rep.pass() { 0 } else { 1 }, text),
    };
    let text = text.unwrap_or_else(|| rep.render(cli.format));
    let written = match cli.out.as_deref() {
        Some(dir)
            if matches!(cli.command, Command::Chain(ChainCommand::Build { .. }))
                && dir.is_dir() =>
        {
            // the directory holds the matrices; the report goes there as well as to stdout
            std::fs::write(dir.join("report.json"), rep.render(Format::Json))
                .and_then(|_| std::io::stdout().write_all(text.as_bytes()))
        }
        Some(path) if !owns_out(&cli.command) => std::fs::write(path, &text),
        _ => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

/// Commands whose --out is a directory or trajectory rather than the report path.
fn owns_out(c: &Command) -> bool {
    matches!(
        c,
        Command::Chain(ChainCommand::Build { .. }) | Command::Hybrid(HybridCommand::Evolve { .. })
    )
}
