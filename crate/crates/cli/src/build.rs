//! JSON artifacts for the `build` command.

use clap::ValueEnum;
use dynrefl::builders::{self, Side, SpectralMap, Strictness};
use dynrefl::checks;
use dynrefl::exactfield::CheckMode;
use dynrefl::models::{self, FRatio, GammaKind};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    BcdFromA,
    Dual,
    Fuse,
    Dress,
    Monodromy,
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaArg {
    RankOne,
    Antisymmetric,
    Diagonal,
}

impl From<GammaArg> for GammaKind {
    fn from(g: GammaArg) -> Self {
        match g {
            GammaArg::RankOne => GammaKind::RankOne,
            GammaArg::Antisymmetric => GammaKind::Antisymmetric,
            GammaArg::Diagonal => GammaKind::Diagonal,
        }
    }
}

pub struct BuildArgs {
    pub what: What,
    pub n: usize,
    pub sites: usize,
    pub spaces: usize,
    pub side: SideArg,
    pub gamma: GammaArg,
    pub strict: bool,
}

pub fn build(a: &BuildArgs) -> Result<Value, String> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let m = models::rational_model(a.n).map_err(|e| s(&e))?;
    let q = &m.quad;
    let v = match a.what {
        What::BcdFromA => {
            let strict = if a.strict { Strictness::Strict } else { Strictness::Lax };
            let (built, post) = builders::build_bcd_from_a(m.printed_a(), &SpectralMap::Absent, strict).map_err(|e| s(&e))?;
            let mut cmp = Vec::new();
            for (name, x, printed) in [("B", &built.b, m.printed_b()), ("C", &built.c, m.printed_c()), ("D", &built.d, m.printed_d())] {
                cmp.push(builders::entrywise_report(name, x, printed).map_err(|e| s(&e))?);
            }
            json!({"quadruple": built.to_json(), "report": post, "comparison_with_printed": cmp})
        }
        What::Dual => {
            let (dual, reports) = builders::build_dual_abcd(q).map_err(|e| s(&e))?;
            json!({"dual": dual.to_json(), "reports": reports})
        }
        What::Fuse => {
            let k = models::gamma_solution(m.registry(), a.gamma.into(), &m.masses(), &FRatio::One).map_err(|e| s(&e))?;
            let side = match a.side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let fz = builders::fuse(&k, &k, q, side).map_err(|e| s(&e))?;
            let r = builders::check_fused(&fz, &k, CheckMode::Exact).map_err(|e| s(&e))?;
            json!({
                "side": format!("{side:?}").to_lowercase(),
                "K": fz.k.to_json(),
                "A": fz.a.to_json(),
                "B": fz.b.to_json(),
                "C": fz.c.to_json(),
                "D": fz.d.to_json(),
                "report": r,
            })
        }
        What::Dress => {
            let (qm, sm) = builders::build_dressing_qs(q, a.spaces).map_err(|e| s(&e))?;
            let r = checks::check_dressing(&qm, &sm, q, CheckMode::Exact).map_err(|e| s(&e))?;
            json!({"spaces": a.spaces, "Q": qm.to_json(), "S": sm.to_json(), "report": r})
        }
        What::Monodromy => {
            let t = builders::monodromy(m.printed_a(), a.sites).map_err(|e| s(&e))?;
            let r = checks::check_rll(&t, m.printed_a(), CheckMode::Exact).map_err(|e| s(&e))?;
            json!({"sites": a.sites, "T": t.to_json(), "report": r})
        }
        What::Hamiltonian => {
            let k = models::gamma_solution(m.registry(), GammaKind::RankOne, &m.masses(), &FRatio::One).map_err(|e| s(&e))?;
            let kk = models::gamma_solution(m.registry(), GammaKind::Diagonal, &[], &FRatio::One).map_err(|e| s(&e))?;
            let h = models::hamiltonian_from_pair(&k, &kk).map_err(|e| s(&e))?;
            let closed = models::hamiltonian_closed_form(m.registry(), &m.masses()).map_err(|e| s(&e))?;
            let mut out = json!({
                "operator": h.to_json(),
                "text": h.to_text(),
                "equals_closed_form": h.equals(&closed),
            });
            if a.n == 2 {
                let r = models::reduce_n2(&h).map_err(|e| s(&e))?;
                out["relative_coordinates"] = json!({"operator": r.to_json(), "text": r.to_text()});
            }
            out
        }
    };
    let mut out = json!({"what": format!("{:?}", a.what), "n": a.n, "variables": m.registry().variables().iter().map(|v| v.name.clone()).collect::<Vec<_>>()});
    if let (Value::Object(o), Value::Object(extra)) = (&mut out, v) {
        o.extend(extra);
    }
    Ok(out)
}
