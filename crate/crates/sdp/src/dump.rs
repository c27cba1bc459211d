//! JSON debug dump of a problem and its solution. See `docs/sdp-dump.md`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::problem::{LinearFunctional, Relation, SdpProblem, Sense};
use crate::solution::SdpSolution;

fn matrix(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())
            })
            .collect(),
    )
}

fn functional(f: &LinearFunctional) -> Value {
    json!({
        "blocks": f.blocks.iter().map(|(b, m)| json!({"block": b, "coeff": matrix(m)})).collect::<Vec<_>>(),
        "scalars": f.scalars.iter().map(|(s, c)| json!({"scalar": s, "coeff": c})).collect::<Vec<_>>(),
    })
}

pub fn dump_json(problem: &SdpProblem, solution: Option<&SdpSolution>) -> Value {
    let constraints: Vec<Value> = problem
        .constraints
        .iter()
        .map(|c| {
            json!({
                "lhs": functional(&c.lhs),
                "relation": match c.relation { Relation::Eq => "eq", Relation::Le => "le", Relation::Ge => "ge" },
                "rhs": c.rhs,
            })
        })
        .collect();
    let mut doc = json!({
        "format": "wpt-sdp-dump/1",
        "problem": {
            "block_dims": problem.block_dims,
            "num_scalars": problem.num_scalars,
            "sense": match problem.sense { Sense::Minimize => "minimize", Sense::Maximize => "maximize" },
            "objective": functional(&problem.objective),
            "constraints": constraints,
        }
    });
    if let Some(s) = solution {
        doc["solution"] = json!({
            "status": s.status,
            "primal_objective": s.primal_objective,
            "dual_objective": s.dual_objective,
            "duality_gap": s.duality_gap,
            "primal_infeasibility": s.primal_infeasibility,
            "dual_infeasibility": s.dual_infeasibility,
            "max_kkt_residual": s.max_kkt_residual,
            "iterations": s.iterations,
            "blocks": s.blocks.iter().map(matrix).collect::<Vec<_>>(),
            "scalars": s.scalars,
            "duals": s.duals,
            "dual_blocks": s.dual_blocks.iter().map(matrix).collect::<Vec<_>>(),
            "dual_scalars": s.dual_scalars,
            "slacks": s.slacks,
        });
    }
    doc
}

pub fn write_dump(path: &Path, problem: &SdpProblem, solution: Option<&SdpSolution>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&dump_json(problem, solution))?;
    std::fs::write(path, text)
}
