//! `meissner`: build and check bodies of constant width from Reuleaux polygons.

mod mask;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use meissner::analysis::{self, base_polygon, DirectionSampler, WidthReport};
use meissner::ballpoly::ReuleauxPolyhedron;
use meissner::fpvd::farthest_point_diagram;
use meissner::io::{self, Artifact, MeshFormat};
use meissner::mesh::{tessellate, tessellate_polyhedron, TriangleMesh};
use meissner::report::{Check, Report};
use meissner::surgery::{dual_pairs, perform_surgery, MeissnerSolid, SurgeryChoice};
use meissner::{make_random, make_regular, Error, Tolerance};

use mask::SurgeryArg;

#[derive(Parser, Debug)]
#[command(name = "meissner", version, about = "Meissner polyhedra from Reuleaux polygons")]
struct Cli {
    /// Equality tolerance (also the width tolerance of `verify`).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Regular,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Stl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Reuleaux polygon.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "random")]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Lift a polygon (or a center set) to its ball polyhedron, and optionally perform surgery.
    Build {
        input: PathBuf,
        #[arg(long)]
        surgery: Option<SurgeryArg>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Redo the surgery of an existing ball polyhedron or Meissner solid.
    Surgery {
        input: PathBuf,
        #[arg(long)]
        surgery: SurgeryArg,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run every check on an artifact and write a JSON report.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        directions: usize,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Tessellate a solid.
    Mesh {
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        level: u32,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Counts, Euler characteristic, volume and width range.
    Info {
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        level: u32,
        #[arg(long, default_value_t = 10_000)]
        directions: usize,
    },
    /// Graphviz export of the Voronoi tree or the vertex graph.
    Graph {
        input: PathBuf,
        /// Write a polygon's farthest-point diagram as JSON instead of DOT.
        #[arg(long)]
        json: bool,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadMask(_)
            | Error::InvalidTolerance(_)
            | Error::EvenOrTooSmallN(_)
            | Error::Parse { .. }
            | Error::AmbiguousBottom { .. } => Failure::Usage(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

type Outcome = Result<bool, Failure>;

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match path {
        Some(p) => fs::write(p, bytes).map_err(|e| anyhow!("writing {}: {e}", p.display())),
        None => std::io::stdout().write_all(bytes).map_err(|e| anyhow!("writing stdout: {e}")),
    };
    res.map_err(Failure::Runtime)
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    emit(path, io::to_json_string(value)?.as_bytes())
}

fn load(path: &Path) -> Result<Artifact, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    Artifact::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn choice(arg: &SurgeryArg, phi: &ReuleauxPolyhedron, tol: &Tolerance) -> Result<SurgeryChoice, Failure> {
    Ok(match arg {
        SurgeryArg::Bottom => SurgeryChoice::Bottom,
        SurgeryArg::Top => SurgeryChoice::Top,
        SurgeryArg::Mask(hex) => {
            let pairs = dual_pairs(phi, tol)?.len();
            SurgeryChoice::Mask(mask::decode(hex, pairs).map_err(usage)?)
        }
    })
}

fn polyhedron_of(artifact: Artifact, tol: &Tolerance) -> Result<ReuleauxPolyhedron, Failure> {
    Ok(match artifact {
        Artifact::Polygon(p) => ReuleauxPolyhedron::from_polygon(&p, tol)?,
        Artifact::Centers(c) => ReuleauxPolyhedron::build(&c.centers, tol)?,
        Artifact::Solid(s) => *s,
        Artifact::Meissner(m) => m.base,
        Artifact::Diagram(_) => return Err(usage("a Voronoi diagram does not determine a solid; pass the polygon")),
    })
}

#[derive(Serialize)]
struct VerifyReport {
    artifact: &'static str,
    pass: bool,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<WidthReport>,
}

fn verify(artifact: Artifact, directions: usize, tol: &Tolerance) -> VerifyReport {
    let kind = artifact.kind();
    let mut report = Report::new();
    let mut width = None;
    match artifact {
        Artifact::Polygon(p) => {
            report.extend("polygon.", p.validate(tol));
            match farthest_point_diagram(&p, tol) {
                Ok(d) => report.extend("diagram.", d.validate(tol)),
                Err(e) => report.push_detail("diagram", false, f64::NAN, e.to_string()),
            }
        }
        Artifact::Diagram(d) => report.extend("diagram.", d.validate(tol)),
        Artifact::Centers(c) => match ReuleauxPolyhedron::build(&c.centers, tol) {
            Ok(phi) => report.extend("solid.", phi.validate(tol)),
            Err(e) => report.push_detail("solid.build", false, f64::NAN, e.to_string()),
        },
        Artifact::Solid(phi) => report.extend("solid.", phi.validate(tol)),
        Artifact::Meissner(m) => {
            report.extend("solid.", m.base.validate(tol));
            report.extend("meissner.", m.validate(tol));
            if let Some(poly) = base_polygon(&m.base, tol) {
                report.extend("meissner.", analysis::slice_check(&m, &poly, 256, tol));
            }
            let w = analysis::constant_width_check(&m, &DirectionSampler::fibonacci(directions), tol.eq);
            report.push_detail(
                "meissner.constant_width",
                w.pass,
                (w.max_width - 1.0).max(1.0 - w.min_width),
                format!("worst direction {:?}", [w.worst_direction.x, w.worst_direction.y, w.worst_direction.z]),
            );
            width = Some(w);
        }
    }
    VerifyReport {
        artifact: kind,
        pass: report.pass(),
        checks: report.checks,
        width,
    }
}

#[derive(Serialize)]
struct Info {
    artifact: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    polygon_vertices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delaunay_faces: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    centers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    faces: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    euler: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dual_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wedges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mesh_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface_area: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_width: Option<f64>,
}

fn info(artifact: Artifact, level: u32, directions: usize, tol: &Tolerance) -> Result<Info, Failure> {
    let mut out = Info {
        artifact: artifact.kind(),
        polygon_vertices: None,
        delaunay_faces: None,
        centers: None,
        vertices: None,
        edges: None,
        faces: None,
        euler: None,
        dual_pairs: None,
        wedges: None,
        mesh_level: None,
        volume: None,
        surface_area: None,
        min_width: None,
        max_width: None,
    };
    let solid_counts = |out: &mut Info, phi: &ReuleauxPolyhedron| {
        let (v, e, f) = (phi.n_vertices(), phi.edges.len(), phi.faces.len());
        out.centers = Some(phi.centers.len());
        out.vertices = Some(v);
        out.edges = Some(e);
        out.faces = Some(f);
        out.euler = Some(v as i64 - e as i64 + f as i64);
    };
    let measure = |out: &mut Info, mesh: &TriangleMesh| -> Result<(), Failure> {
        let (vol, area) = analysis::volume_and_area(mesh)?;
        out.mesh_level = Some(level);
        out.volume = Some(vol);
        out.surface_area = Some(area);
        Ok(())
    };
    let dirs = DirectionSampler::fibonacci(directions);
    match artifact {
        Artifact::Polygon(p) => {
            out.polygon_vertices = Some(p.n());
            out.delaunay_faces = Some(farthest_point_diagram(&p, tol)?.faces.len());
        }
        Artifact::Diagram(d) => {
            out.polygon_vertices = Some(d.polygon.n());
            out.delaunay_faces = Some(d.faces.len());
        }
        Artifact::Centers(c) => out.centers = Some(c.centers.len()),
        Artifact::Solid(phi) => {
            solid_counts(&mut out, &phi);
            let mesh = tessellate_polyhedron(&phi, level, tol)?;
            measure(&mut out, &mesh)?;
            let w = analysis::width_over(&dirs.directions(), tol.eq, |u| analysis::mesh_width(&mesh, u));
            out.min_width = Some(w.min_width);
            out.max_width = Some(w.max_width);
        }
        Artifact::Meissner(m) => {
            solid_counts(&mut out, &m.base);
            out.dual_pairs = Some(m.pairs.len());
            out.wedges = Some(m.wedges.len());
            measure(&mut out, &tessellate(&m, level))?;
            let w = analysis::constant_width_check(&m, &dirs, tol.eq);
            out.min_width = Some(w.min_width);
            out.max_width = Some(w.max_width);
        }
    }
    Ok(out)
}

fn surger(phi: &ReuleauxPolyhedron, arg: &SurgeryArg, tol: &Tolerance) -> Result<MeissnerSolid, Failure> {
    Ok(perform_surgery(phi, &choice(arg, phi, tol)?, tol)?)
}

fn run(cli: Cli) -> Outcome {
    let tol = Tolerance::with_eq(cli.tol)?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Gen { n, kind, seed, o } => {
            let poly = match kind {
                Kind::Regular => make_regular(n)?,
                Kind::Random => make_random(n, seed)?,
            };
            emit_json(o.as_deref(), &poly)?;
            Ok(true)
        }
        Command::Build { input, surgery, o } => {
            let phi = polyhedron_of(load(&input)?, &tol)?;
            match surgery {
                Some(arg) => emit_json(o.as_deref(), &surger(&phi, &arg, &tol)?)?,
                None => emit_json(o.as_deref(), &phi)?,
            }
            Ok(true)
        }
        Command::Surgery { input, surgery, o } => {
            let phi = match load(&input)? {
                a @ (Artifact::Solid(_) | Artifact::Meissner(_)) => polyhedron_of(a, &tol)?,
                other => return Err(usage(format!("surgery needs a solid, got a {}", other.kind()))),
            };
            emit_json(o.as_deref(), &surger(&phi, &surgery, &tol)?)?;
            Ok(true)
        }
        Command::Verify { input, directions, o } => {
            if directions == 0 {
                return Err(usage("--directions must be positive"));
            }
            let report = verify(load(&input)?, directions, &tol);
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {} residual {:e} {}", c.name, c.residual, c.detail.as_deref().unwrap_or(""));
            }
            emit_json(o.as_deref(), &report)?;
            Ok(report.pass)
        }
        Command::Mesh { input, level, format, o } => {
            let mesh = match load(&input)? {
                Artifact::Meissner(m) => tessellate(&m, level),
                Artifact::Solid(phi) => tessellate_polyhedron(&phi, level, &tol)?,
                other => return Err(usage(format!("mesh needs a solid, got a {}", other.kind()))),
            };
            let format = match format {
                Some(Format::Obj) => MeshFormat::Obj,
                Some(Format::Stl) => MeshFormat::Stl,
                None => o.as_deref().and_then(MeshFormat::from_path).unwrap_or(MeshFormat::Obj),
            };
            let mut bytes = Vec::new();
            match format {
                MeshFormat::Obj => io::write_obj(&mesh, &mut bytes)?,
                MeshFormat::Stl => io::write_stl(&mesh, &mut bytes)?,
            }
            emit(o.as_deref(), &bytes)?;
            let sound = mesh.check_watertight().map_err(|e| eprintln!("{e}")).is_ok() && mesh.orientation_consistent();
            Ok(sound)
        }
        Command::Info { input, level, directions } => {
            if directions == 0 {
                return Err(usage("--directions must be positive"));
            }
            emit_json(None, &info(load(&input)?, level, directions, &tol)?)?;
            Ok(true)
        }
        Command::Graph { input, json, o } => {
            let artifact = load(&input)?;
            if json {
                return match artifact {
                    Artifact::Polygon(p) => emit_json(o.as_deref(), &farthest_point_diagram(&p, &tol)?).map(|_| true),
                    other => Err(usage(format!("--json needs a polygon, got a {}", other.kind()))),
                };
            }
            let dot = match artifact {
                Artifact::Polygon(p) => farthest_point_diagram(&p, &tol)?.to_dot(),
                Artifact::Diagram(d) => d.to_dot(),
                Artifact::Solid(phi) => phi.to_dot(),
                Artifact::Meissner(m) => m.base.to_dot(),
                Artifact::Centers(c) => ReuleauxPolyhedron::build(&c.centers, &tol)?.to_dot(),
            };
            emit(o.as_deref(), dot.as_bytes())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
