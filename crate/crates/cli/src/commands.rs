use std::fs;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use morphoforge_api::{ApiErrorKind, EvaluateRequest, JobRequest, ScenarioSpec, UrdfRequest};
use morphoforge_client::{Client, ClientError};
use morphoforge_core::archive::{format_sig9, gnuplot_script};
use morphoforge_core::{
    builtin_scenario, builtin_scenarios, extract_pareto, export_urdf, load_scenario, Error, ErrorKind, IkConfig,
    IkOverrides, OptimizerConfig, ParetoArchive, RobotDesign, Scenario,
};

use crate::{Cli, Command, EvaluateArgs, ExportUrdfArgs, IkArgs, OptimizeArgs};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

const POLL_INTERVAL: Duration = Duration::from_millis(100);

/// A diagnostic and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => EXIT_VALIDATION,
            ErrorKind::Io => EXIT_IO,
            ErrorKind::Internal | ErrorKind::Cancelled => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let code = match e.kind() {
            ApiErrorKind::Validation => EXIT_VALIDATION,
            ApiErrorKind::Io => EXIT_IO,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

pub async fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Serve { bind } => serve(bind).await,
        Command::Scenarios => scenarios(),
        Command::Optimize(args) => optimize(cli.server, args).await,
        Command::Evaluate(args) => evaluate(cli.server, args).await,
        Command::ExportUrdf(args) => export(cli.server, args).await,
    }
}

/// Client for `--server`, or for a private service on a loopback port.
async fn connect(server: Option<String>) -> CmdResult<Client> {
    if let Some(url) = server {
        return Ok(Client::new(url));
    }
    let addr = morphoforge_service::spawn(SocketAddr::from((Ipv4Addr::LOCALHOST, 0)))
        .await
        .map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot start embedded service: {e}"),
        })?;
    Ok(Client::new(format!("http://{addr}")))
}

/// Builtin names travel by name; files are read here and sent inline.
fn scenario_spec(name_or_path: &str) -> CmdResult<(ScenarioSpec, Scenario)> {
    if let Some(s) = builtin_scenario(name_or_path) {
        return Ok((ScenarioSpec::Builtin(s.name.clone()), s));
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        return Err(Failure::validation(format!(
            "`{name_or_path}` is neither a builtin scenario ({}) nor an existing file",
            names.join(", ")
        )));
    }
    let s = load_scenario(path)?;
    Ok((ScenarioSpec::Inline(s.clone()), s))
}

impl IkArgs {
    fn overrides(&self) -> IkOverrides {
        IkOverrides {
            damping: self.ik_lambda,
            max_iterations: self.ik_iters,
            residual_tolerance: self.ik_tol,
            restarts: self.ik_restarts,
            ..IkOverrides::default()
        }
    }
}

/// Effective IK settings: defaults, then the scenario file, then flags.
fn ik_config(scenario: &Scenario, flags: &IkOverrides, seed: u64) -> CmdResult<IkConfig> {
    let cfg = scenario.ik.merge(flags).apply(IkConfig::default()).with_seed(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn parse_design(text: &str) -> CmdResult<RobotDesign> {
    Ok(text.parse::<RobotDesign>()?)
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

async fn serve(bind: SocketAddr) -> CmdResult {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let listener = tokio::net::TcpListener::bind(bind).await.map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot bind {bind}: {e}"),
    })?;
    eprintln!("listening on http://{}", listener.local_addr().map_err(|e| Failure::io(Path::new("socket"), e))?);
    morphoforge_service::serve(listener, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(|e| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    })
}

fn scenarios() -> CmdResult {
    println!("{:<14} {:>7} {:>9}  description", "name", "targets", "n_modules");
    for s in builtin_scenarios() {
        println!(
            "{:<14} {:>7} {:>9}  {}",
            s.name,
            s.targets.len(),
            s.n_modules,
            s.description.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

async fn optimize(server: Option<String>, args: OptimizeArgs) -> CmdResult {
    // everything is validated before the output directory or the service is touched
    let (spec, scenario) = scenario_spec(&args.scenario)?;
    let optimizer = OptimizerConfig {
        population_size: args.population,
        total_evaluations: args.evaluations,
        seed: args.seed,
        ..OptimizerConfig::default()
    };
    optimizer.validate()?;
    let ik_flags = args.ik.overrides();
    ik_config(&scenario, &ik_flags, args.seed)?;
    if args.workers == Some(0) {
        return Err(Failure::validation("invalid workers: must be at least 1"));
    }
    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let urdf_dir = args.out.join("urdf");
    fs::create_dir_all(&urdf_dir).map_err(|e| Failure::io(&urdf_dir, e))?;

    let client = connect(server).await?;
    let request = JobRequest {
        scenario: spec,
        optimizer,
        ik: ik_flags,
        ik_seed: args.seed,
        workers: args.workers,
    };
    let quiet = args.quiet;
    let archive = client
        .run_job(&request, POLL_INTERVAL, |status| {
            if let (false, Some(p)) = (quiet, status.progress) {
                eprintln!("{}", serde_json::to_string(&p).expect("progress serializes"));
            }
        })
        .await?;
    if archive.len() != args.evaluations {
        return Err(Failure {
            code: EXIT_INTERNAL,
            message: format!("archive holds {} records, expected {}", archive.len(), args.evaluations),
        });
    }
    write_artifacts(&archive, &args.out, args.plot)?;
    print_summary(&archive);
    Ok(())
}

fn write_artifacts(archive: &ParetoArchive, out: &Path, plot: bool) -> CmdResult {
    write(&out.join("archive.csv"), &archive.to_csv())?;
    write(&out.join("pareto.csv"), &archive.pareto_csv())?;
    write(&out.join("pareto.json"), &archive.pareto_json())?;
    for record in extract_pareto(archive) {
        let name = format!("{}_{}", archive.scenario, record.eval_index);
        let path: PathBuf = out.join("urdf").join(format!("pareto_{}.urdf", record.eval_index));
        write(&path, &export_urdf(&record.design(), &name))?;
    }
    if plot {
        write(&out.join("plot.gp"), &gnuplot_script(&archive.scenario))?;
    }
    Ok(())
}

fn print_summary(archive: &ParetoArchive) {
    let mut front = extract_pareto(archive);
    front.sort_by(|a, b| a.e_design.total_cmp(&b.e_design).then(a.eval_index.cmp(&b.eval_index)));
    println!(
        "{} evaluations on {}, {} Pareto solutions",
        archive.len(),
        archive.scenario,
        front.len()
    );
    println!("{:>6} {:>4} {:>12} {:>12}  design", "eval", "dof", "e_task", "e_design");
    for r in front {
        let design = r.design();
        println!(
            "{:>6} {:>4} {:>12} {:>12}  {}",
            r.eval_index,
            design.dof(),
            format_sig9(r.e_task),
            format_sig9(r.e_design),
            design
        );
    }
}

async fn evaluate(server: Option<String>, args: EvaluateArgs) -> CmdResult {
    let design = parse_design(&args.design)?;
    let (spec, scenario) = scenario_spec(&args.scenario)?;
    let ik_flags = args.ik.overrides();
    ik_config(&scenario, &ik_flags, args.seed)?;

    let client = connect(server).await?;
    let result = client
        .evaluate(&EvaluateRequest {
            design: design.to_string(),
            scenario: spec,
            ik: ik_flags,
            seed: args.seed,
        })
        .await?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result).expect("result serializes"));
        return Ok(());
    }
    println!("design           {}", result.design);
    println!("scenario         {}", result.scenario);
    println!("dof              {}", result.dof);
    println!("e_task           {}", format_sig9(result.e_task));
    println!("e_design         {}", format_sig9(result.e_design));
    println!("e_design_joint   {}", result.e_design_joint);
    println!("e_design_length  {}", format_sig9(result.e_design_length));
    println!("{:>6} {:>12} {:>9} {:>6}  q", "target", "residual", "converged", "iters");
    for (i, t) in result.targets.iter().enumerate() {
        let q: Vec<String> = t.q.iter().map(|v| format_sig9(*v)).collect();
        println!(
            "{:>6} {:>12} {:>9} {:>6}  [{}]",
            i + 1,
            format_sig9(t.residual_norm),
            t.converged,
            t.iterations_used,
            q.join(", ")
        );
    }
    Ok(())
}

async fn export(server: Option<String>, args: ExportUrdfArgs) -> CmdResult {
    let design = parse_design(&args.design)?;
    let path = match args.out {
        Some(p) => p,
        None => std::env::var_os("MORPHOFORGE_OUT")
            .map_or_else(PathBuf::new, PathBuf::from)
            .join("robot.urdf"),
    };
    let client = connect(server).await?;
    let response = client
        .urdf(&UrdfRequest {
            design: design.to_string(),
            name: args.name,
        })
        .await?;
    write(&path, &response.urdf)?;
    println!("wrote        {}", path.display());
    println!("dof          {}", response.dof);
    println!("total_length {}", format_sig9(response.total_length));
    Ok(())
}
