use std::collections::BTreeMap;
use std::io::Write;

use super::config::{DeformConfig, PredSampling, ResamplePolicy};
use super::stepper::Stepper;
use super::DisplacementField;
use crate::error::{GeoError, Result};
use crate::geometry::{
    curvature_weight, mean_curvature, resample_as_vertices, SampledCloud, SurfaceSamples,
};
use crate::losses::{total_mesh_loss, LossBreakdown, MeshStructure, StageClassInput};
use crate::mesh::{topology_report, EdgeFaces, Mesh, TopologyReport};
use crate::spatial::{self_intersections, PointIndex};
use crate::util::derive_seed;
use crate::Vec3;

/// One loss evaluation during a fit. Iteration 0 is the stage's starting
/// point; later rows are trial steps, accepted or not.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub stage: usize,
    pub iteration: usize,
    pub breakdown: LossBreakdown,
    pub step_rate: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitStatus {
    Completed,
    /// The loss became non-finite; meshes hold the last accepted state.
    Aborted { reason: String },
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Output meshes of stages 1..=S, keyed by class.
    pub stages: Vec<BTreeMap<String, Mesh>>,
    /// Optimized displacement of each stage, keyed by class.
    pub displacements: Vec<BTreeMap<String, DisplacementField>>,
    pub trace: Vec<TraceRow>,
    pub topology: BTreeMap<String, TopologyReport>,
    /// Number of intersecting non-adjacent face pairs in each final mesh.
    pub self_intersections: BTreeMap<String, usize>,
    pub status: FitStatus,
}

impl FitResult {
    /// The last stage's mesh for `class`.
    pub fn final_mesh(&self, class: &str) -> Option<&Mesh> {
        self.stages.last().and_then(|s| s.get(class))
    }

    /// Accepted rows of one stage, in order.
    pub fn accepted_totals(&self, stage: usize) -> Vec<f64> {
        self.trace
            .iter()
            .filter(|r| r.stage == stage && r.accepted)
            .map(|r| r.breakdown.total)
            .collect()
    }
}

/// Writes the trace as CSV with the unweighted terms summed over classes.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "stage",
        "iteration",
        "chamfer",
        "inter_nc",
        "laplacian",
        "intra_nc",
        "edge",
        "total",
        "step_rate",
        "accepted",
    ])?;
    for r in trace {
        let t = r.breakdown.summed_terms();
        w.write_record([
            r.stage.to_string(),
            r.iteration.to_string(),
            format!("{:e}", t.chamfer),
            format!("{:e}", t.inter_nc),
            format!("{:e}", t.laplacian),
            format!("{:e}", t.intra_nc),
            format!("{:e}", t.edge),
            format!("{:e}", r.breakdown.total),
            format!("{:e}", r.step_rate),
            r.accepted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct ClassSetup {
    name: String,
    structure: MeshStructure,
    gt: SampledCloud,
    gt_index: PointIndex,
}

struct Evaluation {
    breakdown: LossBreakdown,
    gradient: Vec<Vec3>,
}

/// Picks `keep` of `n` indices pseudo-randomly, returned in ascending order.
fn subsample_indices(n: usize, keep: usize, seed: u64) -> Vec<usize> {
    let mut keyed: Vec<(u64, usize)> = (0..n).map(|i| (derive_seed(seed, &[i as u64]), i)).collect();
    keyed.sort_unstable();
    let mut chosen: Vec<usize> = keyed[..keep].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    chosen
}

fn setup_classes(
    templates: &BTreeMap<String, Mesh>,
    targets: &BTreeMap<String, Mesh>,
    config: &DeformConfig,
    seed: u64,
) -> Result<Vec<ClassSetup>> {
    if templates.is_empty() {
        return Err(GeoError::EmptyInput("no template meshes"));
    }
    if templates.keys().ne(targets.keys()) {
        return Err(GeoError::InvalidParameter(format!(
            "template classes {:?} do not match target classes {:?}",
            templates.keys().collect::<Vec<_>>(),
            targets.keys().collect::<Vec<_>>()
        )));
    }
    let smallest = targets.values().map(Mesh::vertex_count).min().unwrap_or(0);
    let mut out = Vec::with_capacity(templates.len());
    for (ci, (name, template)) in templates.iter().enumerate() {
        config.weights.get(name)?;
        if template.face_count() == 0 {
            return Err(GeoError::EmptyInput("template has no faces"));
        }
        let ef = EdgeFaces::new(template);
        if ef.non_manifold_edge_count() > 0 {
            return Err(GeoError::NonManifold(format!(
                "template '{name}' has {} non-manifold edges",
                ef.non_manifold_edge_count()
            )));
        }
        let target = &targets[name];
        let kappa = curvature_weight(&mean_curvature(target)?, config.kappa_max)?;
        let mut gt = resample_as_vertices(target, Some(&kappa))?;
        if gt.len() > smallest {
            gt = gt.select(&subsample_indices(gt.len(), smallest, derive_seed(seed, &[u64::MAX, ci as u64])));
        }
        let gt_index = PointIndex::build(&gt.points)?;
        out.push(ClassSetup {
            name: name.clone(),
            structure: MeshStructure::new(template),
            gt,
            gt_index,
        });
    }
    Ok(out)
}

struct StageProblem<'a> {
    stage: usize,
    classes: &'a [ClassSetup],
    prev: &'a [Mesh],
    offsets: Vec<usize>,
    samples: Vec<Option<SurfaceSamples>>,
    config: &'a DeformConfig,
}

impl StageProblem<'_> {
    fn draw_samples(&mut self, seed: u64, iteration: u64) -> Result<()> {
        for (ci, class) in self.classes.iter().enumerate() {
            self.samples[ci] = match self.config.pred_sampling {
                PredSampling::Vertices => None,
                PredSampling::Surface => {
                    let n = self.config.pred_samples.unwrap_or(class.gt.len());
                    let key = derive_seed(seed, &[self.stage as u64, iteration, ci as u64]);
                    Some(SurfaceSamples::draw(&self.prev[ci], n, key)?)
                }
            };
        }
        Ok(())
    }

    fn evaluate(&self, disp: &[Vec3]) -> Result<Evaluation> {
        let mut meshes = Vec::with_capacity(self.classes.len());
        let mut clouds = Vec::with_capacity(self.classes.len());
        for (ci, prev) in self.prev.iter().enumerate() {
            let d = &disp[self.offsets[ci]..self.offsets[ci + 1]];
            let verts = prev.vertices().iter().zip(d).map(|(v, dv)| v + dv).collect();
            let mesh = prev.with_vertices(verts)?;
            let cloud = match &self.samples[ci] {
                Some(s) => s.realize(&mesh, None)?,
                None => resample_as_vertices(&mesh, None)?,
            };
            meshes.push(mesh);
            clouds.push(cloud);
        }
        let inputs: Vec<StageClassInput<'_>> = self
            .classes
            .iter()
            .enumerate()
            .map(|(ci, c)| StageClassInput {
                stage: self.stage,
                class: &c.name,
                mesh: &meshes[ci],
                structure: &c.structure,
                displacement: &disp[self.offsets[ci]..self.offsets[ci + 1]],
                pred_cloud: &clouds[ci],
                gt_cloud: &c.gt,
                gt_index: Some(&c.gt_index),
            })
            .collect();
        let (breakdown, grads) = total_mesh_loss(&inputs, &self.config.weights, self.config.losses)?;
        let gradient = grads.iter().flat_map(|g| g.total_displacement()).collect();
        Ok(Evaluation {
            breakdown,
            gradient,
        })
    }
}

fn max_abs(g: &[Vec3]) -> f64 {
    g.iter().map(|v| v.amax()).fold(0.0, f64::max)
}

/// Deforms each template towards its target in `config.stages` successive
/// stages. Stage `s` optimizes a displacement added to the stage `s - 1`
/// mesh; connectivity never changes.
pub fn fit(
    templates: &BTreeMap<String, Mesh>,
    targets: &BTreeMap<String, Mesh>,
    config: &DeformConfig,
    seed: u64,
) -> Result<FitResult> {
    config.validate()?;
    let classes = setup_classes(templates, targets, config, seed)?;
    let mut prev: Vec<Mesh> = templates.values().cloned().collect();
    let mut offsets = vec![0];
    for m in &prev {
        offsets.push(offsets.last().unwrap() + m.vertex_count());
    }
    let total_len = *offsets.last().unwrap();
    let mut stepper = Stepper::new(config.step, total_len, config.rate_growth)?;

    let mut result = FitResult {
        stages: Vec::new(),
        displacements: Vec::new(),
        trace: Vec::new(),
        topology: BTreeMap::new(),
        self_intersections: BTreeMap::new(),
        status: FitStatus::Completed,
    };

    'stages: for stage in 1..=config.stages {
        if config.reset_per_stage || stage == 1 {
            stepper.reset();
        }
        let mut problem = StageProblem {
            stage,
            classes: &classes,
            prev: &prev,
            offsets: offsets.clone(),
            samples: vec![None; classes.len()],
            config,
        };
        problem.draw_samples(seed, 0)?;
        let mut disp = vec![Vec3::zeros(); total_len];
        let mut current = match problem.evaluate(&disp) {
            Ok(e) => e,
            Err(GeoError::Numerical(reason)) => {
                result.status = FitStatus::Aborted { reason };
                break 'stages;
            }
            Err(e) => return Err(e),
        };
        result.trace.push(TraceRow {
            stage,
            iteration: 0,
            breakdown: current.breakdown.clone(),
            step_rate: stepper.rate(),
            accepted: true,
        });

        for iteration in 1..=config.iterations {
            if config.resample == ResamplePolicy::PerIteration {
                problem.draw_samples(seed, iteration as u64)?;
                current = match problem.evaluate(&disp) {
                    Ok(e) => e,
                    Err(GeoError::Numerical(reason)) => {
                        result.status = FitStatus::Aborted { reason };
                        break;
                    }
                    Err(e) => return Err(e),
                };
            }
            if max_abs(&current.gradient) <= config.gradient_tolerance {
                break;
            }
            let mut trial = stepper.propose(&disp, &current.gradient);
            let mut accepted = None;
            for halving in 0..=config.max_halvings {
                let rate = stepper.rate();
                let eval = match problem.evaluate(&trial) {
                    Ok(e) => e,
                    Err(GeoError::Numerical(reason)) => {
                        result.status = FitStatus::Aborted {
                            reason: format!("stage {stage}, iteration {iteration}: {reason}"),
                        };
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let ok = eval.breakdown.total <= current.breakdown.total;
                result.trace.push(TraceRow {
                    stage,
                    iteration,
                    breakdown: eval.breakdown.clone(),
                    step_rate: rate,
                    accepted: ok,
                });
                if ok {
                    stepper.accept();
                    accepted = Some(eval);
                    break;
                }
                stepper.reject();
                if halving < config.max_halvings {
                    trial = stepper.retry(&disp);
                }
            }
            if result.status != FitStatus::Completed {
                break;
            }
            let Some(eval) = accepted else { break };
            let before = current.breakdown.total;
            disp = trial;
            current = eval;
            let decrease = before - current.breakdown.total;
            if decrease <= config.tolerance * before.abs() {
                break;
            }
        }

        let mut meshes = BTreeMap::new();
        let mut fields = BTreeMap::new();
        let mut next = Vec::with_capacity(prev.len());
        for (ci, c) in classes.iter().enumerate() {
            let d = disp[offsets[ci]..offsets[ci + 1]].to_vec();
            let field = DisplacementField::new(d)?;
            let mesh = super::apply_displacement(&prev[ci], &field)?;
            meshes.insert(c.name.clone(), mesh.clone());
            fields.insert(c.name.clone(), field);
            next.push(mesh);
        }
        result.stages.push(meshes);
        result.displacements.push(fields);
        prev = next;
        if result.status != FitStatus::Completed {
            break;
        }
    }

    for (c, mesh) in classes.iter().zip(&prev) {
        result.topology.insert(c.name.clone(), topology_report(mesh));
        result
            .self_intersections
            .insert(c.name.clone(), self_intersections(mesh).len());
    }
    Ok(result)
}
