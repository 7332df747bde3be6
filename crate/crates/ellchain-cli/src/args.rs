//! Command line definition and the key=value config merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "ellchain",
    version,
    about = "Elliptic spin-Ruijsenaars systems and their frozen spin chains"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random sample drawn in the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Overrides the tolerance of every residual check (negative controls keep theirs).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output path: report file, chain directory, or trajectory file depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// key=value file; flags given on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Bin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Vertex,
    Face,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Scalar,
    Vertex,
    Face,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X,
    Y,
    Z,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Theta and Kronecker function identities at random points.
    ThetaCheck {
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// R-matrix axioms and deformed permutation identities.
    RmatrixVerify {
        #[arg(long, value_enum, default_value_t = Kind::Vertex)]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Commutativity of the difference operators on probe functions.
    OpsVerify {
        #[arg(long, value_enum, default_value_t = Case::Scalar)]
        case: Case,
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Pairs "n,m;n,m"; all pairs from ±1..±(N−1), N (scalar) or ±1, 2 (spin) by default.
        #[arg(long, allow_hyphen_values = true)]
        pairs: Option<String>,
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Equilibrium of the modular family member selected by --B-word.
    Equilibrium {
        #[command(flatten)]
        family: Family,
    },
    #[command(subcommand)]
    Chain(ChainCommand),
    #[command(subcommand)]
    Hybrid(HybridCommand),
}

/// Base parameters of the modular family and the word selecting a member.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Family {
    #[arg(long = "N", default_value_t = 4)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "0.3+0.05i")]
    pub eta: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0.7")]
    pub eps: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0.2+2i")]
    pub omega: String,
    /// Dynamical parameters (face kind), comma separated.
    #[arg(
        long,
        allow_hyphen_values = true,
        default_value = "0.31+0.1i,-0.2+0.05i"
    )]
    pub a: String,
    /// Letters S, T, s, t (lowercase = inverse), read right to left; "" or "1" is the seed.
    #[arg(long = "B-word", default_value = "")]
    #[serde(rename = "B-word")]
    pub b_word: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainCommand {
    /// Freeze the spin-Ruijsenaars operators into H_(n,B) and verify the chain.
    Build {
        #[arg(long, value_enum, default_value_t = Kind::Vertex)]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[command(flatten)]
        family: Family,
        /// Comma separated flows; all of ±1..±(N−1) by default.
        #[arg(long = "n-range", allow_hyphen_values = true)]
        n_range: Option<String>,
        /// Compare against the hbar-extraction oracle (default: on for N ≤ 4).
        #[arg(long)]
        oracle: Option<bool>,
    },
    /// Re-run the chain checks on matrices saved by `chain build`.
    Verify {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Eigenvalues of a sum of saved hamiltonians.
    Spectrum {
        #[arg(long)]
        dir: PathBuf,
        /// Flows to add up.
        #[arg(long, allow_hyphen_values = true, default_value = "1,-1")]
        n: String,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HybridCommand {
    /// Integrate the n = 1 hybrid flow, writing the trajectory to --out.
    Evolve {
        #[arg(long, value_enum, default_value_t = Kind::Vertex)]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[command(flatten)]
        family: Family,
        /// Start positions; the equilibrium of --B-word when absent.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p0: Option<String>,
        #[arg(long = "t-end", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Keep every k-th step in the trajectory.
        #[arg(long = "sample-every", default_value_t = 10)]
        sample_every: usize,
        /// Pauli matrix evolved as A(0) on --site.
        #[arg(long, value_enum, default_value_t = Observable::Z)]
        observable: Observable,
        #[arg(long, default_value_t = 1)]
        site: usize,
        /// Basis state |e_k⟩ in which ⟨A(t)⟩ is recorded.
        #[arg(long, default_value_t = 0)]
        state: usize,
    },
}

/// Append `--key=value` for every config entry whose flag is not already on the command line.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = argv;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), k + 1))?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        if key == "config" {
            return Err(format!(
                "{}:{}: config files do not nest",
                path.display(),
                k + 1
            ));
        }
        let flag = format!("--{key}");
        if out
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
        {
            continue;
        }
        out.push(format!("{flag}={value}"));
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(Path::new(p).to_path_buf());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &[&str]) -> Vec<String> {
        s.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# comment\nseed = 9\nN=5\nB-word=\ntol=1e-7\n").unwrap();
        let a = argv(&[
            "ellchain",
            "equilibrium",
            "--N",
            "3",
            "--config",
            cfg.to_str().unwrap(),
        ]);
        let merged = merge_config(a).unwrap();
        let cli = Cli::try_parse_from(&merged).unwrap();
        assert_eq!(cli.seed, 9);
        assert_eq!(cli.tol, Some(1e-7));
        match cli.command {
            Command::Equilibrium { family } => {
                assert_eq!(family.n, 3);
                assert_eq!(family.b_word, "");
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn malformed_config_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        std::fs::write(&cfg, "seed 9\n").unwrap();
        assert!(merge_config(argv(&[
            "ellchain",
            "theta-check",
            "--config",
            cfg.to_str().unwrap()
        ]))
        .is_err());
    }
}
