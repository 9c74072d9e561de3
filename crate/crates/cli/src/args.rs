use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(name = "patmat", version, about = "Pattern matrix spectra, bounds, certificates and protocol simulations")]
pub struct Cli {
    /// Arithmetic for the LPs.
    #[arg(long, env = "PATMAT_MODE", default_value = "exact", global = true)]
    pub mode: ModeArg,
    #[arg(long, default_value = "json", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Where the Boolean function comes from: a catalog name or a hex table.
#[derive(Args, Debug, Clone, Default)]
pub struct FnArgs {
    /// Catalog name (or, and, parity, maj, thr, mp, omb, const, chi, random).
    #[arg(long = "fn")]
    pub name: Option<String>,
    /// Truth table in hex, bit x set iff f(x) = −1; needs --t.
    #[arg(long)]
    pub hex: Option<String>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed for `--fn random`.
    #[arg(long, default_value_t = 0)]
    pub fn_seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Det,
    Weight,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// E-profile, deg_ε and a dual witness.
    Adeg {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long)]
        eps: String,
        /// Also write the dual-witness certificate here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Threshold degree with an orthogonal distribution at degthr.
    Degthr {
        #[command(flatten)]
        f: FnArgs,
    },
    /// W_R, brute-force W and the rounding certificate at degree d.
    Weight {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long)]
        d: usize,
    },
    /// Write a certificate file.
    Witness {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long, value_enum)]
        kind: crate::cert::CertKind,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Bound name for `--kind bound-report`.
        #[arg(long)]
        bound: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular values of the (n, t, f)-pattern matrix.
    Spectrum {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long)]
        n: usize,
        /// Cross-check against the SVD of the built matrix.
        #[arg(long)]
        verify: bool,
    },
    /// One bound report.
    Bounds {
        /// Bound name; see the README for the list.
        bound: String,
        #[command(flatten)]
        p: BoundArgs,
    },
    /// Run a protocol on the (n, t, f)-pattern matrix.
    Simulate {
        #[arg(value_enum)]
        protocol: Protocol,
        #[command(flatten)]
        f: FnArgs,
        #[arg(long)]
        n: usize,
        /// Monte Carlo trials; 0 runs the exact computation only.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print this many sample transcripts as JSON lines.
        #[arg(long, default_value_t = 0)]
        transcripts: usize,
    },
    /// Re-check a certificate file from its payload.
    Verify { file: PathBuf },
    /// A bound over a grid of functions and sizes, as CSV.
    Sweep {
        bound: String,
        /// Comma-separated catalog names.
        #[arg(long)]
        fns: String,
        /// Comma-separated arities.
        #[arg(long)]
        ts: String,
        /// Comma-separated block sizes n/t.
        #[arg(long, default_value = "2")]
        blocks: String,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// List catalog functions and their truth tables.
    Catalog {
        #[arg(long, default_value_t = 3)]
        t: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct BoundArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Predicate name (disj, and, parity, maj, thrK) or a +/- list.
    #[arg(long)]
    pub predicate: Option<String>,
    /// Largest t for the paturi table.
    #[arg(long, default_value_t = 10)]
    pub t_max: usize,
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
