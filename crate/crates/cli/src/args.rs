//! Command-line and JSON configuration of the experiments. Every setting is
//! optional on the command line; missing ones come from `--config`, then from
//! the defaults filled in by each experiment.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "carnot", version, about = "Numerical experiments on step-two Carnot groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bracket tables, H-type identities and group axioms on random triples.
    GroupSelftest(Run<SelftestArgs>),
    /// Haar samplers, Grassmannian closure and isometry compatibility.
    HaarTest(Run<HaarArgs>),
    /// Ball measures of an intrinsic graph against the Ahlfors band.
    AhlforsCheck(Run<AhlforsArgs>),
    /// Discrete p-modulus of a fixture, a problem file or a point family.
    ModulusSolve(Run<ModulusArgs>),
    /// L^p and surface-ring diagnostics of a radial witness.
    ExceptionalWitness(Run<WitnessArgs>),
    /// Monte Carlo check of a Crofton-type formula.
    CroftonVerify(Run<CroftonArgs>),
    /// Holder bound and modulus trend of a Grassmannian family.
    CorollaryTrend(Run<CorollaryArgs>),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GroupSelftest(_) => "group-selftest",
            Command::HaarTest(_) => "haar-test",
            Command::AhlforsCheck(_) => "ahlfors-check",
            Command::ModulusSolve(_) => "modulus-solve",
            Command::ExceptionalWitness(_) => "exceptional-witness",
            Command::CroftonVerify(_) => "crofton-verify",
            Command::CorollaryTrend(_) => "corollary-trend",
        }
    }
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct Run<T: Args> {
    #[command(flatten)]
    pub params: T,
    /// JSON configuration; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraArg {
    #[value(name = "hR")]
    #[serde(rename = "hR")]
    Real,
    #[value(name = "hC")]
    #[serde(rename = "hC")]
    Complex,
    #[value(name = "hQ")]
    #[serde(rename = "hQ")]
    Quaternion,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceArg {
    #[value(name = "euclid")]
    #[serde(rename = "euclid")]
    Euclid,
    #[value(name = "hR")]
    #[serde(rename = "hR")]
    Real,
    #[value(name = "hC")]
    #[serde(rename = "hC")]
    Complex,
    #[value(name = "hQ")]
    #[serde(rename = "hQ")]
    Quaternion,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NormArg {
    Max,
    Cygan,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrandArg {
    Gauss,
    Annulus,
    Bump,
    File,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Annulus,
    Problem,
    Lines,
    HorizontalPlanes,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessArg {
    RadialPow,
    RadialLog,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SelftestArgs {
    #[arg(long, value_enum)]
    pub algebra: Option<AlgebraArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Random triples per check.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HaarArgs {
    #[arg(long, value_enum)]
    pub algebra: Option<AlgebraArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kh: Option<usize>,
    #[arg(long)]
    pub kv: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_reflections: Option<bool>,
    /// CSV file with one sampled subalgebra basis per row.
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AhlforsArgs {
    #[arg(long, value_enum)]
    pub algebra: Option<AlgebraArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Graph fixture; without it the graph of the zero map over `M` is used.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Horizontal coordinates spanning `M`.
    #[arg(long, value_delimiter = ',')]
    pub mh: Option<Vec<usize>>,
    /// Central coordinates spanning `M`.
    #[arg(long, value_delimiter = ',')]
    pub mv: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Grid nodes per ball radius.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub c0_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModulusArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Problem file for `--family problem`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub refinements: Option<usize>,
    #[arg(long)]
    pub floor: Option<f64>,
    #[arg(long)]
    pub inner: Option<f64>,
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long)]
    pub radial: Option<usize>,
    #[arg(long)]
    pub angular: Option<usize>,
    /// Lines or planes in a point family.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub divisions: Option<usize>,
    #[arg(long, value_enum)]
    pub algebra: Option<AlgebraArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub algebra: Option<AlgebraArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub witness: Option<WitnessArg>,
    #[arg(long)]
    pub d_m: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Cells per axis of each dyadic shell.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Dyadic shells towards the singularity.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub rings: Option<usize>,
    /// Horizontal coordinates spanning the test surface.
    #[arg(long, value_delimiter = ',')]
    pub mh: Option<Vec<usize>>,
    /// Central coordinates spanning the test surface.
    #[arg(long, value_delimiter = ',')]
    pub mv: Option<Vec<usize>>,
    /// Grid step of the test surface.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CroftonArgs {
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Subspace dimension for Euclidean and horizontal runs.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub kh: Option<usize>,
    #[arg(long)]
    pub kv: Option<usize>,
    #[arg(long, value_enum)]
    pub integrand: Option<IntegrandArg>,
    /// Integrand JSON for `--integrand file`.
    #[arg(long)]
    pub integrand_file: Option<PathBuf>,
    /// Centre of a Gaussian or bump, horizontal coordinates then central ones.
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub inner: Option<f64>,
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_reflections: Option<bool>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CorollaryArgs {
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub kh: Option<usize>,
    #[arg(long)]
    pub kv: Option<usize>,
    /// Exponents to compare.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub resolutions: Option<usize>,
    #[arg(long)]
    pub planes: Option<usize>,
    #[arg(long)]
    pub divisions: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_reflections: Option<bool>,
    /// Trend table, one row per exponent and level.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
