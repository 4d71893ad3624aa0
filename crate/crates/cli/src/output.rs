//! Fixed-precision CSV and JSON writers.

use floquet_junction::checkpoints::SuiteReport;
use floquet_junction::stability::{CellDynamics, ScanAxis, ScanGrid};
use floquet_junction::Trajectory;
use num_complex::Complex;
use serde_json::{json, Map, Value};

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `x` rounded to twelve significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        // `+ 0.0` turns -0 into 0.
        Value::from(fmt_num(x).parse::<f64>().unwrap_or(x) + 0.0)
    } else {
        Value::Null
    }
}

pub fn complex(z: Complex<f64>) -> Value {
    json!({"re": num(z.re), "im": num(z.im)})
}

pub const TRAJECTORY_COLUMNS: [&str; 14] = [
    "t", "P1", "P2", "P3", "P4", "Ptot", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3",
    "re_a4", "im_a4",
];

fn trajectory_rows(t: &Trajectory<f64>) -> impl Iterator<Item = [f64; 14]> + '_ {
    t.times
        .iter()
        .zip(&t.states)
        .zip(&t.probabilities)
        .map(|((&time, s), p)| {
            let mut row = [0.0; 14];
            row[0] = time;
            row[1..6].copy_from_slice(p);
            for (k, a) in s.amps.iter().enumerate() {
                row[6 + 2 * k] = a.re;
                row[7 + 2 * k] = a.im;
            }
            row
        })
}

pub fn trajectory_csv(t: &Trajectory<f64>) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for row in trajectory_rows(t) {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_json(t: &Trajectory<f64>) -> Value {
    let rows: Vec<Value> = trajectory_rows(t)
        .map(|row| Value::Array(row.iter().map(|&x| num(x)).collect()))
        .collect();
    json!({"columns": TRAJECTORY_COLUMNS, "rows": rows})
}

fn axis_json(a: &ScanAxis<f64>) -> Value {
    json!({
        "name": a.param.name(),
        "min": num(a.min),
        "max": num(a.max),
        "count": a.count,
        "values": a.values().into_iter().map(num).collect::<Vec<_>>(),
    })
}

fn matrix<V>(grid: &ScanGrid<f64>, f: impl Fn(usize) -> V) -> Vec<Vec<V>> {
    (0..grid.axis1.count)
        .map(|i| {
            (0..grid.axis2.count)
                .map(|j| f(i * grid.axis2.count + j))
                .collect()
        })
        .collect()
}

pub fn scan_json(grid: &ScanGrid<f64>, dynamics: Option<&[CellDynamics<f64>]>) -> Value {
    let mut obj = Map::new();
    obj.insert("quantity".into(), json!(grid.quantity.name()));
    obj.insert("template".into(), params_json(&grid.template));
    obj.insert("tol".into(), num(grid.tol));
    obj.insert("axis1".into(), axis_json(&grid.axis1));
    obj.insert("axis2".into(), axis_json(&grid.axis2));
    obj.insert(
        "values".into(),
        json!(matrix(grid, |k| num(grid.values[k]))),
    );
    obj.insert(
        "verdicts".into(),
        json!(matrix(grid, |k| grid.verdicts[k].label())),
    );
    obj.insert(
        "max_im".into(),
        json!(matrix(grid, |k| num(grid.max_im[k]))),
    );
    obj.insert(
        "boundary_cells".into(),
        json!(grid
            .boundary_cells
            .iter()
            .map(|&(i, j)| [i, j])
            .collect::<Vec<_>>()),
    );
    let lines: Vec<Value> = grid
        .boundary
        .iter()
        .map(|line| {
            json!(line
                .iter()
                .map(|&(x, y)| [num(x), num(y)])
                .collect::<Vec<_>>())
        })
        .collect();
    obj.insert("boundary".into(), Value::Array(lines));
    if let Some(cells) = dynamics {
        let rows: Vec<Value> = cells
            .iter()
            .map(|c| {
                json!({
                    "i": c.i,
                    "j": c.j,
                    "case": c.case.label(),
                    "max_im": num(c.max_im),
                    "max_total": num(c.max_total),
                    "consistent": c.consistent,
                })
            })
            .collect();
        obj.insert("dynamics".into(), Value::Array(rows));
    }
    Value::Object(obj)
}

pub fn params_json(p: &floquet_junction::SystemParams<f64>) -> Value {
    json!({
        "nu": num(p.nu),
        "lambda": num(p.lambda),
        "Omega": num(p.zeeman),
        "omega": num(p.omega),
        "epsilon": num(p.epsilon),
        "beta_l": num(p.beta_l),
        "beta_r": num(p.beta_r),
    })
}

pub fn suite_json(name: &str, report: &SuiteReport, artifacts: &[String]) -> Value {
    let items: Vec<Value> = report
        .items
        .iter()
        .map(|it| {
            let mut v = json!({
                "group": it.group,
                "name": it.name,
                "value": num(it.value),
                "criterion": rounded(serde_json::to_value(it.criterion).unwrap_or(Value::Null)),
                "passed": it.passed,
            });
            if let Some(e) = &it.error {
                v["error"] = json!(e);
            }
            v
        })
        .collect();
    let failed = report.items.iter().filter(|i| !i.passed).count();
    json!({
        "suite": name,
        "passed": failed == 0,
        "total": report.items.len(),
        "failed": failed,
        "items": items,
        "artifacts": artifacts,
    })
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) => n.as_f64().map(num).unwrap_or(Value::Number(n)),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
