use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use regionsynth::exec::Executor;
use regionsynth::lts::{parse_lts, Lts};
use regionsynth::reductions::{
    brute_force_min_hitting_set, generate_instance, hitting_set_from_removal,
    parse_hitting_set, removal_from_hitting_set, HittingSetInstance, HsError, ReductionFamily,
};
use regionsynth::removal::{apply_removal, parse_removal, RemovalMode};
use regionsynth::repair::{greedy_upper_bound, min_removal, RepairOptions, Target};
use regionsynth::separation::{check_property, CheckOptions, Property};
use regionsynth::synthesis::{
    parse_net, reachability_graph, synthesized_net, verify_embedding, verify_language_simulation,
    verify_realization, ReachabilityError,
};

/// Petri net synthesis and minimum-removal repair of labeled transition systems.
///
/// Exit status: 0 on a positive answer, 1 on a negative one, 2 on usage,
/// file or format errors.
#[derive(Parser)]
#[command(name = "regionsynth", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// Worker threads for separation and repair
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Write the produced artifact here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reduce witnesses to few regions
    #[arg(long)]
    shrink: bool,
}

impl Common {
    fn executor(&self) -> Executor {
        Executor::new(self.jobs as usize)
    }

    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            shrink: self.shrink,
            executor: self.executor(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Ssp,
    Essp,
    Both,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Ssp => Property::Ssp,
            PropertyArg::Essp => Property::Essp,
            PropertyArg::Both => Property::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Embedding,
    Language,
    Realization,
}

impl From<RelationArg> for Target {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::Embedding => Target::Embedding,
            RelationArg::Language => Target::Language,
            RelationArg::Realization => Target::Realization,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Edge,
    Event,
    State,
}

impl From<ModeArg> for RemovalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Edge => RemovalMode::Edge,
            ModeArg::Event => RemovalMode::Event,
            ModeArg::State => RemovalMode::State,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    EdgeLangReal,
    EdgeEmb,
    Event,
    StateLangReal,
    StateEmb,
}

impl From<FamilyArg> for ReductionFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::EdgeLangReal => ReductionFamily::EdgeLangReal,
            FamilyArg::EdgeEmb => ReductionFamily::EdgeEmb,
            FamilyArg::Event => ReductionFamily::EventAll,
            FamilyArg::StateLangReal => ReductionFamily::StateLangReal,
            FamilyArg::StateEmb => ReductionFamily::StateEmb,
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Decide a separation property; print a witness or the unsolvable atoms
    Check {
        #[arg(long, value_enum)]
        property: PropertyArg,
        lts: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize a net from a witness of the property
    Synth {
        #[arg(long, value_enum, default_value = "both")]
        property: PropertyArg,
        lts: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Reachability graph of a net
    Rg {
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        net: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check that a net implements an LTS
    Verify {
        #[arg(long, value_enum)]
        relation: RelationArg,
        lts: PathBuf,
        net: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Find a minimum removal that makes the LTS implementable
    Repair {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum)]
        property: RelationArg,
        #[arg(long, default_value_t = 2)]
        max_k: usize,
        /// Greedy upper bound instead of the exact search
        #[arg(long)]
        greedy: bool,
        lts: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a removal file to an LTS
    Apply {
        lts: PathBuf,
        removal: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum hitting set by exhaustive search
    Hs {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate the gadget LTS of a hitting-set instance
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Map a hitting set to a removal (a minimum one if no elements are given)
    MapFwd {
        #[arg(long, value_enum)]
        family: FamilyArg,
        instance: PathBuf,
        elements: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Map a removal of the gadget LTS back to a hitting set
    MapBack {
        #[arg(long, value_enum)]
        family: FamilyArg,
        instance: PathBuf,
        removal: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// A decision: exit 0 or 1.
struct Outcome(bool);

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_lts(path: &Path) -> Result<Lts> {
    parse_lts(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn read_hs(path: &Path) -> Result<HittingSetInstance> {
    parse_hitting_set(&read(path)?).with_context(|| format!("{}", path.display()))
}

/// Writes an artifact to `--out`, or prints it.
fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(verb: Verb) -> Result<Outcome> {
    match verb {
        Verb::Check { property, lts, common } => {
            let a = read_lts(&lts)?;
            let property = Property::from(property);
            match check_property(&a, property, &common.check_options()) {
                Ok(w) => {
                    println!("{property} holds");
                    emit(&common, &w.render(&a))?;
                    Ok(Outcome(true))
                }
                Err(report) => {
                    println!("{property} fails");
                    print!("{}", report.render(&a));
                    Ok(Outcome(false))
                }
            }
        }
        Verb::Synth { property, lts, common } => {
            let a = read_lts(&lts)?;
            let property = Property::from(property);
            match check_property(&a, property, &common.check_options()) {
                Ok(w) => {
                    emit(&common, &synthesized_net(&a, &w)?.to_text())?;
                    Ok(Outcome(true))
                }
                Err(report) => {
                    println!("{property} fails; no net synthesized");
                    print!("{}", report.render(&a));
                    Ok(Outcome(false))
                }
            }
        }
        Verb::Rg { cap, net, common } => {
            let n = parse_net(&read(&net)?).with_context(|| format!("{}", net.display()))?;
            match reachability_graph(&n, cap) {
                Ok(rg) => {
                    emit(&common, &rg.to_text())?;
                    Ok(Outcome(true))
                }
                Err(e @ ReachabilityError::CapExceeded { .. }) => {
                    println!("{e}");
                    Ok(Outcome(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        Verb::Verify { relation, lts, net, common: _ } => {
            let a = read_lts(&lts)?;
            let n = parse_net(&read(&net)?).with_context(|| format!("{}", net.display()))?;
            let result = match relation {
                RelationArg::Embedding => verify_embedding(&a, &n).map(|phi| {
                    let mut out = String::new();
                    for (s, m) in phi.iter().enumerate() {
                        out.push_str(&format!("phi {} {m}\n", a.state_name(s)));
                    }
                    out
                }),
                RelationArg::Language => verify_language_simulation(&a, &n).map(|_| String::new()),
                RelationArg::Realization => verify_realization(&a, &n).map(|_| String::new()),
            };
            let relation = Target::from(relation);
            match result {
                Ok(details) => {
                    println!("{relation} verified");
                    print!("{details}");
                    Ok(Outcome(true))
                }
                Err(failure) => {
                    println!("{relation} fails: {failure}");
                    Ok(Outcome(false))
                }
            }
        }
        Verb::Repair {
            mode,
            property,
            max_k,
            greedy,
            lts,
            common,
        } => {
            let a = read_lts(&lts)?;
            let options = RepairOptions {
                executor: common.executor(),
                shrink: common.shrink,
            };
            let (mode, target) = (RemovalMode::from(mode), Target::from(property));
            let result = if greedy {
                greedy_upper_bound(&a, mode, target, &options).map_err(|e| e.to_string())
            } else {
                min_removal(&a, mode, target, max_k, &options).map_err(|e| e.to_string())
            };
            match result {
                Ok(r) => {
                    if let Some(path) = &common.out {
                        fs::write(path, r.removed.to_text())
                            .with_context(|| format!("cannot write {}", path.display()))?;
                    }
                    print!("{}", r.render());
                    Ok(Outcome(true))
                }
                Err(message) => {
                    println!("{message}");
                    Ok(Outcome(false))
                }
            }
        }
        Verb::Apply { lts, removal, common } => {
            let a = read_lts(&lts)?;
            let set = parse_removal(&read(&removal)?, RemovalMode::Edge)
                .with_context(|| format!("{}", removal.display()))?;
            match apply_removal(&a, &set) {
                Ok(b) => {
                    emit(&common, &b.to_text())?;
                    Ok(Outcome(true))
                }
                Err(e) => {
                    println!("invalid {} removal: {e}", set.mode());
                    Ok(Outcome(false))
                }
            }
        }
        Verb::Hs { instance, common: _ } => {
            let h = read_hs(&instance)?;
            match brute_force_min_hitting_set(&h) {
                Ok(z) => {
                    println!("size={}", z.len());
                    println!("hitting-set {}", h.names(&z).join(" "));
                    println!("lambda={}", h.lambda);
                    Ok(Outcome(z.len() <= h.lambda))
                }
                Err(e @ HsError::EmptySet(_)) => {
                    println!("{e}");
                    Ok(Outcome(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        Verb::Gen { family, instance, common } => {
            let h = read_hs(&instance)?;
            let family = ReductionFamily::from(family);
            let (a, kappa) = generate_instance(&h, family)?;
            if common.out.is_some() {
                println!("kappa={kappa}");
                println!("states={} edges={}", a.num_states(), a.edges().len());
            }
            emit(&common, &format!("# family {family}, kappa={kappa}\n{}", a.to_text()))?;
            Ok(Outcome(true))
        }
        Verb::MapFwd {
            family,
            instance,
            elements,
            common,
        } => {
            let h = read_hs(&instance)?;
            let z: Vec<usize> = if elements.is_empty() {
                brute_force_min_hitting_set(&h)?
            } else {
                let mut z = Vec::new();
                for x in &elements {
                    match h.universe.iter().position(|u| u == x) {
                        Some(i) => z.push(i),
                        None => bail!("{x} is not in the universe"),
                    }
                }
                z.sort_unstable();
                z.dedup();
                z
            };
            match removal_from_hitting_set(&h, &z, family.into()) {
                Ok(r) => {
                    emit(&common, &r.to_text())?;
                    Ok(Outcome(true))
                }
                Err(e) => {
                    println!("{e}");
                    Ok(Outcome(false))
                }
            }
        }
        Verb::MapBack {
            family,
            instance,
            removal,
            common,
        } => {
            let h = read_hs(&instance)?;
            let family = ReductionFamily::from(family);
            let set = parse_removal(&read(&removal)?, family.mode())
                .with_context(|| format!("{}", removal.display()))?;
            match hitting_set_from_removal(&h, &set, family) {
                Ok(z) => {
                    emit(&common, &format!("hitting-set {}\nsize={}\n", h.names(&z).join(" "), z.len()))?;
                    Ok(Outcome(true))
                }
                Err(e) => {
                    println!("{e}");
                    Ok(Outcome(false))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(Outcome(true)) => ExitCode::SUCCESS,
        Ok(Outcome(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
