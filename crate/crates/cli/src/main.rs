//! `relbn`: belief networks from relational data.
//!
//! Exit status is 0 on success, 1 on domain or input errors and 2 on usage
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relbn_core::attr::{attr_set, AttrSet, AttributeDecl};
use relbn_core::decompose::{
    anneal_decompose, build_junction_tree, domain_sizes, graham_is_acyclic, greedy_decompose, Hypergraph, Objective,
    Schedule,
};
use relbn_core::dependency::{decompose_4nf, preserves_fds, verify_lossless_join, Decomposition, Dependency};
use relbn_core::inference::{compile_evidence, oracle_query, CalibratedModel, Engine, PropagateOptions};
use relbn_core::io::{parse_dependencies, parse_domains, parse_evidence, parse_hyperedges, parse_relation, DomainMap};
use relbn_core::learn::{learn_network, Method, DEFAULT_ASSIGNMENT_CAP};
use relbn_core::network::build_bn;
use relbn_core::report;
use relbn_core::{Error, Relation, Result};

#[derive(Parser)]
#[command(name = "relbn", version, about = "Belief networks from statistical relational data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a scheme to 4NF from its dependencies.
    #[command(name = "decompose-4nf")]
    Decompose4nf(Common),
    /// Test a dependency or structural property.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        #[command(flatten)]
        common: Common,
        /// Left-hand side for fd, md and pd checks.
        #[arg(long)]
        lhs: Option<String>,
        /// Right-hand side for fd, md and pd checks.
        #[arg(long)]
        rhs: Option<String>,
        /// Explicit remainder for a pd check (defaults to all other attributes).
        #[arg(long)]
        given: Option<String>,
        /// Hyperedge file for the acyclic check.
        #[arg(long)]
        hyperedges: Option<PathBuf>,
    },
    /// Build the directed network and its neighborhood graph.
    #[command(name = "build-bn")]
    BuildBn(Common),
    /// Triangulate the neighborhood graph and build the junction tree.
    #[command(name = "decompose-bn")]
    DecomposeBn(Common),
    /// Learn local characteristics for every node.
    Learn(Common),
    /// Answer a query by propagation over the junction tree.
    Infer {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Answer a query by brute force over the relation.
    #[command(name = "oracle-infer")]
    OracleInfer {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Regenerate the reference tables from the bundled samples.
    Reproduce {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Fd,
    Md,
    Pd,
    Acyclic,
    LosslessJoin,
    Preserves,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Frequency,
    Dirichlet,
    Nnor,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    States,
    Fill,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Greedy,
    Anneal,
}

#[derive(Args)]
struct Common {
    /// Relation file (CSV with a header row).
    #[arg(long)]
    relation: Option<PathBuf>,
    /// Domain declarations, `attr: v1,v2,...` per line.
    #[arg(long)]
    domains: Option<PathBuf>,
    /// Dependencies, one per line.
    #[arg(long)]
    deps: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "frequency")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "states")]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "greedy")]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Restrict every domain to its first and last value.
    #[arg(long)]
    binary_slice: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Evidence file: `attr=value` lines or `marginal` blocks.
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// Target attribute set, e.g. `u1,u2`; repeatable.
    #[arg(long = "target")]
    targets: Vec<String>,
    /// Use these cliques instead of triangulating the network.
    #[arg(long)]
    hyperedges: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn source(path: &Path) -> String {
    path.display().to_string()
}

fn parse_attrs(s: &str) -> AttrSet {
    attr_set(&s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect::<Vec<_>>())
}

impl Common {
    fn domains(&self) -> Result<DomainMap> {
        match &self.domains {
            Some(p) => parse_domains(&read(p)?, &source(p)),
            None => Ok(DomainMap::new()),
        }
    }

    fn relation(&self) -> Result<Relation> {
        let p = self
            .relation
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --relation".into()))?;
        let r = parse_relation(&read(p)?, &self.domains()?, &source(p))?;
        Ok(if self.binary_slice { r.binary_slice() } else { r })
    }

    fn deps(&self) -> Result<Vec<Dependency>> {
        let p = self
            .deps
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --deps".into()))?;
        parse_dependencies(&read(p)?, &source(p))
    }

    /// Attribute declarations from the relation when given, else from the
    /// domain file.
    fn decls(&self) -> Result<Vec<AttributeDecl>> {
        if self.relation.is_some() {
            return Ok(self.relation()?.scheme().to_vec());
        }
        if self.domains.is_none() {
            return Err(Error::Config("this command needs --relation or --domains".into()));
        }
        let decls = self
            .domains()?
            .iter()
            .map(|(a, vals)| AttributeDecl::new(a.clone(), vals))
            .collect::<Result<Vec<_>>>()?;
        Ok(if self.binary_slice {
            decls.iter().map(AttributeDecl::binary_slice).collect()
        } else {
            decls
        })
    }

    fn method(&self) -> Method {
        match self.method {
            MethodArg::Frequency => Method::Frequency,
            MethodArg::Dirichlet => Method::Dirichlet,
            MethodArg::Nnor => Method::Nnor,
        }
    }

    fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveArg::States => Objective::States,
            ObjectiveArg::Fill => Objective::Fill,
        }
    }

    fn propagate_options(&self) -> Result<PropagateOptions> {
        let o = PropagateOptions {
            tolerance: self.tolerance,
            ..PropagateOptions::default()
        };
        o.validate()?;
        Ok(o)
    }

    /// Cliques of the network's neighborhood graph, organized as a tree.
    fn junction_tree(&self, decls: &[AttributeDecl]) -> Result<(String, relbn_core::decompose::JunctionTree)> {
        let bn = build_bn(decls, &self.deps()?)?;
        let g = bn.neighborhood_graph();
        let sizes = domain_sizes(decls);
        let t = match self.optimizer {
            OptimizerArg::Greedy => greedy_decompose(&g, &sizes, self.objective())?,
            OptimizerArg::Anneal => anneal_decompose(&g, &sizes, self.objective(), self.seed, &Schedule::default())?,
        };
        let tree = build_junction_tree(&t.cliques)?;
        Ok((report::bn_decomposition_text(&t, &tree, &sizes)?, tree))
    }

    fn emit(&self, text: &str) -> Result<()> {
        emit(self.out.as_deref(), text)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn decompose_4nf_cmd(c: &Common) -> Result<()> {
    let deps = c.deps()?;
    let scheme: AttrSet = if c.relation.is_some() || c.domains.is_some() {
        c.decls()?.iter().map(|d| d.name.clone()).collect()
    } else {
        deps.iter().flat_map(|d| d.family()).collect()
    };
    let rho = decompose_4nf(&scheme, &deps)?;
    let mut text = report::decomposition_text(&rho);
    if c.relation.is_some() {
        let r = c.relation()?;
        let lj = verify_lossless_join(&r, &rho)?;
        text.push_str(&format!("lossless_join {}\n", if lj { "yes" } else { "no" }));
    }
    if deps.iter().all(|d| d.kind == relbn_core::dependency::DepKind::Fd) {
        let dp = preserves_fds(&deps, &rho)?;
        text.push_str(&format!("preserves_fds {}\n", if dp { "yes" } else { "no" }));
    }
    c.emit(&text)
}

fn check_cmd(
    what: CheckKind,
    c: &Common,
    lhs: Option<&str>,
    rhs: Option<&str>,
    given: Option<&str>,
    hyperedges: Option<&Path>,
) -> Result<()> {
    let sides = || -> Result<(AttrSet, AttrSet)> {
        match (lhs, rhs) {
            (Some(l), Some(r)) => Ok((parse_attrs(l), parse_attrs(r))),
            _ => Err(Error::Config("this check needs --lhs and --rhs".into())),
        }
    };
    let verdict = |ok: bool| if ok { "holds\n" } else { "fails\n" };
    let text = match what {
        CheckKind::Fd => {
            let (l, r) = sides()?;
            verdict(c.relation()?.fd_holds(&l, &r)?).to_string()
        }
        CheckKind::Md => {
            let (l, r) = sides()?;
            verdict(c.relation()?.md_holds(&l, &r)?).to_string()
        }
        CheckKind::Pd => {
            let (l, r) = sides()?;
            let rel = c.relation()?;
            let ok = match given {
                Some(z) => rel.pd_holds_wrt(&l, &r, &parse_attrs(z))?,
                None => rel.pd_holds(&l, &r)?,
            };
            verdict(ok).to_string()
        }
        CheckKind::Acyclic => {
            let p = hyperedges.ok_or_else(|| Error::Config("the acyclic check needs --hyperedges".into()))?;
            let edges = parse_hyperedges(&read(p)?, &source(p))?;
            if graham_is_acyclic(&Hypergraph::new(edges)) {
                "acyclic\n".to_string()
            } else {
                "cyclic\n".to_string()
            }
        }
        CheckKind::LosslessJoin => {
            let r = c.relation()?;
            let rho = scheme_decomposition(c, &r)?;
            if verify_lossless_join(&r, &rho)? {
                "lossless\n".to_string()
            } else {
                "lossy\n".to_string()
            }
        }
        CheckKind::Preserves => {
            let deps = c.deps()?;
            let scheme: AttrSet = if c.relation.is_some() || c.domains.is_some() {
                c.decls()?.iter().map(|d| d.name.clone()).collect()
            } else {
                deps.iter().flat_map(|d| d.family()).collect()
            };
            let rho = decompose_4nf(&scheme, &deps)?;
            if preserves_fds(&deps, &rho)? {
                "preserved\n".to_string()
            } else {
                "not preserved\n".to_string()
            }
        }
    };
    c.emit(&text)
}

/// The 4NF decomposition of the relation's scheme under `--deps`.
fn scheme_decomposition(c: &Common, r: &Relation) -> Result<Decomposition> {
    decompose_4nf(&r.attrs(), &c.deps()?)
}

fn build_bn_cmd(c: &Common) -> Result<()> {
    let bn = build_bn(&c.decls()?, &c.deps()?)?;
    c.emit(&report::network_text(&bn))
}

fn decompose_bn_cmd(c: &Common) -> Result<()> {
    let (text, _) = c.junction_tree(&c.decls()?)?;
    c.emit(&text)
}

fn learn_cmd(c: &Common) -> Result<()> {
    let r = c.relation()?;
    let bn = build_bn(r.scheme(), &c.deps()?)?;
    let lcs = learn_network(&r, &bn, c.method(), DEFAULT_ASSIGNMENT_CAP)?;
    c.emit(&report::learned_text(&lcs))
}

fn evidence(q: &QueryArgs, decls: &[AttributeDecl]) -> Result<Vec<relbn_core::inference::JeffreyConstraint>> {
    match &q.evidence {
        Some(p) => compile_evidence(&parse_evidence(&read(p)?, &source(p))?, decls),
        None => Ok(Vec::new()),
    }
}

fn infer_cmd(c: &Common, q: &QueryArgs) -> Result<()> {
    let r = c.relation()?;
    let opts = c.propagate_options()?;
    let tree = match &q.hyperedges {
        Some(p) => build_junction_tree(&parse_hyperedges(&read(p)?, &source(p))?)?,
        None => c.junction_tree(r.scheme())?.1,
    };
    let model = match c.method() {
        Method::Frequency => CalibratedModel::from_relation(tree, &r)?,
        m => {
            let bn = build_bn(r.scheme(), &c.deps()?)?;
            let factors = learn_network(&r, &bn, m, DEFAULT_ASSIGNMENT_CAP)?
                .iter()
                .map(|lc| lc.table.to_factor())
                .collect::<Result<Vec<_>>>()?;
            CalibratedModel::from_factors(tree, &factors)?
        }
    };
    let ev = evidence(q, r.scheme())?;
    let text = if q.targets.is_empty() {
        let post = model.propagate(&ev, opts)?;
        format!("engine {}\n{}", Engine::CliquePropagation, report::model_text(&post, None)?)
    } else {
        let targets: Vec<AttrSet> = q.targets.iter().map(|t| parse_attrs(t)).collect();
        report::query_text(Engine::CliquePropagation, &model.query(&ev, &targets, opts)?)
    };
    c.emit(&text)
}

fn oracle_cmd(c: &Common, q: &QueryArgs) -> Result<()> {
    let r = c.relation()?;
    let ev = evidence(q, r.scheme())?;
    let targets: Vec<AttrSet> = if !q.targets.is_empty() {
        q.targets.iter().map(|t| parse_attrs(t)).collect()
    } else if let Some(p) = &q.hyperedges {
        let mut e = parse_hyperedges(&read(p)?, &source(p))?;
        e.sort();
        e
    } else {
        r.scheme().iter().map(|d| attr_set(&[d.name.as_str()])).collect()
    };
    let marginals = oracle_query(&r, &ev, &targets)?;
    c.emit(&report::query_text(Engine::UniversalOracle, &marginals))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose4nf(c) => decompose_4nf_cmd(c),
        Command::Check {
            what,
            common,
            lhs,
            rhs,
            given,
            hyperedges,
        } => check_cmd(
            *what,
            common,
            lhs.as_deref(),
            rhs.as_deref(),
            given.as_deref(),
            hyperedges.as_deref(),
        ),
        Command::BuildBn(c) => build_bn_cmd(c),
        Command::DecomposeBn(c) => decompose_bn_cmd(c),
        Command::Learn(c) => learn_cmd(c),
        Command::Infer { common, query } => infer_cmd(common, query),
        Command::OracleInfer { common, query } => oracle_cmd(common, query),
        Command::Reproduce { out } => emit(out.as_deref(), &report::reproduce()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
