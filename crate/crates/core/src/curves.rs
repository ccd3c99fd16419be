//! Local models of curves: a smooth point `k[t]/(t^N)` and a node `k[x,y]/(xy)` truncated at `N`.

use std::sync::Arc;

use serde::Serialize;

use crate::action::{Action, ActionKind, ConstantAction};
use crate::algebra::{AlgebraBuilder, Element, NormalFormAlgebra};
use crate::error::{Error, Result};
use crate::invariants::{self, compare_spans, ComparisonReport, SpanLabel, SubalgebraSpan};
use crate::ring::BaseRing;

pub fn smooth_algebra(base: &BaseRing, var: &str, n: u32) -> Result<Arc<NormalFormAlgebra>> {
    AlgebraBuilder::new(base.clone()).var(var).truncation(Some(n)).build()
}

pub fn node_algebra(base: &BaseRing, n: u32) -> Result<Arc<NormalFormAlgebra>> {
    AlgebraBuilder::new(base.clone())
        .var("x")
        .var("y")
        .relation(&[("x", 1), ("y", 1)])
        .truncation(Some(n))
        .build()
}

/// Degree below which truncation at `n` cannot interfere with norms of an order-`order` action.
pub fn degree_guard(n: u32, order: usize) -> u32 {
    (n + 1).saturating_sub(order as u32).max(1)
}

fn truncation_of(alg: &NormalFormAlgebra) -> Result<u32> {
    alg.truncation()
        .ok_or_else(|| Error::Structural("local models need a total-degree truncation".into()))
}

#[derive(Clone, Debug)]
pub struct SmoothPointModel {
    action: Action,
    n: u32,
}

impl SmoothPointModel {
    /// Checks the shape `k[t]/(t^N)` and that `N(t)` has valuation `|G|`.
    pub fn new(action: Action) -> Result<Self> {
        let alg = action.algebra().clone();
        if alg.variables().len() != 1 || alg.copies() != 1 || !alg.relations().is_empty() {
            return Err(Error::Structural("a smooth point model is k[t]/(t^N)".into()));
        }
        let n = truncation_of(&alg)?;
        let t = Element::variable_at(&alg, 0, 0);
        let faithful = match action.kind() {
            ActionKind::Constant(c) => c.is_faithful(),
            ActionKind::Hopf(h) => h.derivations().iter().all(|d| !d.apply(&t).is_zero()),
            ActionKind::Product(p) => {
                p.etale().is_faithful() && p.infinitesimal().derivations().iter().all(|d| !d.apply(&t).is_zero())
            }
        };
        if !faithful {
            return Err(Error::NotGenericallyFree("the action has a nontrivial kernel".into()));
        }
        let v = action.norm(&t).valuation();
        if v != Some(action.order() as u32) {
            return Err(Error::NotGenericallyFree(format!(
                "valuation of N(t) is {}, expected {}",
                v.map_or("infinite".to_string(), |v| v.to_string()),
                action.order()
            )));
        }
        Ok(SmoothPointModel { action, n })
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn truncation(&self) -> u32 {
        self.n
    }

    pub fn guard(&self) -> u32 {
        degree_guard(self.n, self.action.order())
    }

    pub fn norm_of_t(&self) -> Element {
        self.action.norm(&Element::variable_at(self.action.algebra(), 0, 0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothReport {
    pub norm: String,
    pub valuation: u32,
    pub order: usize,
    pub equal: bool,
    pub certified_degree: u32,
    pub invariants_length: u32,
}

/// `A^G` against the subalgebra generated by `N(t)`, modulo the degree guard.
pub fn smooth_invariants_check(model: &SmoothPointModel) -> Result<SmoothReport> {
    let alg = model.action.algebra();
    let nt = model.norm_of_t();
    let inv = invariants::invariant_subring(&model.action)?;
    let gen = SubalgebraSpan::generated_by(alg, std::slice::from_ref(&nt), SpanLabel::Custom)?;
    let g = model.guard();
    let rep = compare_spans(&inv, &gen, Some(g));
    Ok(SmoothReport {
        norm: nt.to_string(),
        valuation: nt.valuation().unwrap_or(0),
        order: model.action.order(),
        equal: rep.equal && inv.includes(&gen),
        certified_degree: g,
        invariants_length: inv.length(),
    })
}

#[derive(Clone, Debug)]
pub struct NodeModel {
    action: ConstantAction,
    n: u32,
    swaps: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeGroupData {
    pub order: usize,
    pub g0: Vec<String>,
    pub delta_x: Vec<String>,
    pub delta_y: Vec<String>,
    pub h_order: usize,
    pub k_order: usize,
    pub psi: Option<String>,
    #[serde(skip)]
    pub g0_idx: Vec<usize>,
    #[serde(skip)]
    pub psi_idx: Option<usize>,
}

fn branch(alg: &NormalFormAlgebra, e: &Element) -> Option<usize> {
    // 0: a series in x without constant term, 1: likewise in y
    let mut side = None;
    for (i, _) in e.terms() {
        let m = &alg.basis()[i];
        let s = match (m.exps[0], m.exps[1]) {
            (a, 0) if a > 0 => 0,
            (0, b) if b > 0 => 1,
            _ => return None,
        };
        if *side.get_or_insert(s) != s {
            return None;
        }
    }
    side
}

impl NodeModel {
    pub fn new(action: ConstantAction) -> Result<Self> {
        let alg = action.algebra().clone();
        let shape_ok = alg.var_names() == ["x", "y"]
            && alg.copies() == 1
            && alg.relations() == [vec![1, 1]];
        if !shape_ok {
            return Err(Error::Structural("a node model is k[x,y]/(xy) truncated".into()));
        }
        let n = truncation_of(&alg)?;
        let x = Element::variable_at(&alg, 0, 0);
        let y = Element::variable_at(&alg, 1, 0);
        let mut swaps = Vec::new();
        for g in 0..action.group().order() {
            let (bx, by) = (branch(&alg, &action.apply(g, &x)), branch(&alg, &action.apply(g, &y)));
            match (bx, by) {
                (Some(0), Some(1)) => swaps.push(false),
                (Some(1), Some(0)) => swaps.push(true),
                _ => {
                    return Err(Error::InvalidAction(format!(
                        "{} does not permute the branch ideals (x), (y)",
                        action.group().label(g)
                    )))
                }
            }
        }
        Ok(NodeModel { action, n, swaps })
    }

    pub fn action(&self) -> &ConstantAction {
        &self.action
    }

    pub fn truncation(&self) -> u32 {
        self.n
    }

    pub fn guard(&self) -> u32 {
        degree_guard(self.n, self.action.group().order())
    }

    pub fn decompose(&self) -> NodeGroupData {
        let g = self.action.group();
        let alg = self.action.algebra();
        let x = Element::variable_at(alg, 0, 0);
        let y = Element::variable_at(alg, 1, 0);
        let g0: Vec<usize> = (0..g.order()).filter(|&i| !self.swaps[i]).collect();
        let dx: Vec<usize> = g0.iter().copied().filter(|&i| self.action.apply(i, &x) == x).collect();
        let dy: Vec<usize> = g0.iter().copied().filter(|&i| self.action.apply(i, &y) == y).collect();
        let psi = (0..g.order()).find(|&i| self.swaps[i]);
        let labels = |v: &[usize]| v.iter().map(|&i| g.label(i).to_string()).collect();
        NodeGroupData {
            order: g.order(),
            g0: labels(&g0),
            delta_x: labels(&dx),
            delta_y: labels(&dy),
            h_order: g0.len() / dx.len(),
            k_order: g0.len() / dy.len(),
            psi: psi.map(|i| g.label(i).to_string()),
            g0_idx: g0,
            psi_idx: psi,
        }
    }

    /// `Nm_H(v)`: the product of the distinct images of a variable under `G_0`.
    fn branch_norm(&self, data: &NodeGroupData, var: usize) -> Element {
        let alg = self.action.algebra();
        let v = Element::variable_at(alg, var, 0);
        let mut seen: Vec<Element> = Vec::new();
        for &g in &data.g0_idx {
            let img = self.action.apply(g, &v);
            if !seen.contains(&img) {
                seen.push(img);
            }
        }
        seen.iter().fold(Element::one(alg), |acc, e| &acc * e)
    }

    fn check_hypothesis(&self, data: &NodeGroupData) -> Result<()> {
        let base = self.action.algebra().base();
        for (name, d) in [("Delta_x", &data.delta_x), ("Delta_y", &data.delta_y)] {
            if !base.is_unit(&base.from_i64(d.len() as i64)) {
                return Err(Error::Gated(format!("|{name}| = {} is not invertible in {}", d.len(), base.spec())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuotientShape {
    Node,
    Smooth,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeReport {
    pub u: String,
    pub v: String,
    pub g0_invariants_generated: bool,
    pub uv_vanishes: bool,
    pub swap_generator: Option<String>,
    pub invariants_generated: bool,
    pub shape: QuotientShape,
    pub certified_degree: u32,
}

impl NodeReport {
    pub fn holds(&self) -> bool {
        self.g0_invariants_generated && self.uv_vanishes && self.invariants_generated
    }
}

fn spans_agree(inv: &SubalgebraSpan, gens: &[Element], guard: u32) -> Result<bool> {
    let alg = inv.algebra();
    let s = SubalgebraSpan::generated_by(alg, gens, SpanLabel::Custom)?;
    Ok(compare_spans(inv, &s, Some(guard)).equal && inv.includes(&s))
}

pub fn node_invariants_check(model: &NodeModel) -> Result<NodeReport> {
    let data = model.decompose();
    model.check_hypothesis(&data)?;
    let guard = model.guard();
    let u = model.branch_norm(&data, 0);
    let v = model.branch_norm(&data, 1);
    let g0_action = Action::constant(model.action.restrict(&data.g0_idx)?)?;
    let inv0 = invariants::invariant_subring(&g0_action)?;
    let g0_ok = spans_agree(&inv0, &[u.clone(), v.clone()], guard)?;
    let uv_vanishes = (&u * &v).is_zero();
    let full = Action::constant(model.action.clone())?;
    let inv = invariants::invariant_subring(&full)?;
    let (swap_generator, invariants_generated, shape) = match data.psi_idx {
        Some(psi) => {
            let w = &u + &model.action.apply(psi, &u);
            let ok = spans_agree(&inv, std::slice::from_ref(&w), guard)?;
            (Some(w.to_string()), ok, QuotientShape::Smooth)
        }
        None => (None, g0_ok, QuotientShape::Node),
    };
    Ok(NodeReport {
        u: u.to_string(),
        v: v.to_string(),
        g0_invariants_generated: g0_ok,
        uv_vanishes,
        swap_generator,
        invariants_generated,
        shape,
        certified_degree: guard,
    })
}

/// `sigma_l(x) = Nm_{G_0}(x) + psi(Nm_{G_0}(x))` with `l = |G_0|`.
pub fn node_sigma_check(model: &NodeModel) -> Result<bool> {
    let data = model.decompose();
    let psi = data
        .psi_idx
        .ok_or_else(|| Error::Precondition("no branch-swapping element".into()))?;
    let alg = model.action.algebra();
    let x = Element::variable_at(alg, 0, 0);
    let nm = data
        .g0_idx
        .iter()
        .fold(Element::one(alg), |acc, &g| &acc * &model.action.apply(g, &x));
    let expected = &nm + &model.action.apply(psi, &nm);
    let full = Action::constant(model.action.clone())?;
    let sigmas = full.sigma(&x);
    Ok(sigmas[data.g0_idx.len() - 1] == expected)
}

/// `A^G = Sigma^G(A)` modulo the degree guard, under the kernel hypothesis.
pub fn cogenerated_check_node(model: &NodeModel) -> Result<ComparisonReport> {
    let data = model.decompose();
    model.check_hypothesis(&data)?;
    let full = Action::constant(model.action.clone())?;
    let inv = invariants::invariant_subring(&full)?;
    let kl = invariants::kl_subalgebra(&full)?;
    Ok(compare_spans(&inv, &kl, Some(model.guard())))
}

pub fn cogenerated_check_smooth(model: &SmoothPointModel) -> Result<ComparisonReport> {
    let inv = invariants::invariant_subring(&model.action)?;
    let kl = invariants::kl_subalgebra(&model.action)?;
    Ok(compare_spans(&inv, &kl, Some(model.guard())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::AlgebraAutomorphism;
    use crate::group::ConstantGroup;
    use crate::parse::parse_element;

    fn node_action(p: u64, n: u32, group: ConstantGroup, gens: &[usize], imgs: &[[&str; 2]]) -> ConstantAction {
        let a = node_algebra(&BaseRing::prime_field(p).unwrap(), n).unwrap();
        let autos = imgs
            .iter()
            .map(|[ix, iy]| {
                AlgebraAutomorphism::new(&a, vec![parse_element(&a, ix).unwrap(), parse_element(&a, iy).unwrap()]).unwrap()
            })
            .collect();
        ConstantAction::new(&a, group, gens, autos).unwrap()
    }

    #[test]
    fn swap_node() {
        let m = NodeModel::new(node_action(5, 8, ConstantGroup::cyclic(2).unwrap(), &[1], &[["y", "x"]])).unwrap();
        let d = m.decompose();
        assert_eq!(d.g0, ["e"]);
        assert_eq!(d.psi.as_deref(), Some("g^1"));
        let r = node_invariants_check(&m).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.swap_generator.as_deref(), Some("x + y"));
        assert!(node_sigma_check(&m).unwrap());
        assert!(cogenerated_check_node(&m).unwrap().equal);
    }

    #[test]
    fn z4_node_over_f5() {
        let m = NodeModel::new(node_action(5, 10, ConstantGroup::cyclic(4).unwrap(), &[1], &[["y", "-x"]])).unwrap();
        let d = m.decompose();
        assert_eq!(d.g0, ["e", "g^2"]);
        assert!(d.delta_x.len() == 1 && d.delta_y.len() == 1);
        let r = node_invariants_check(&m).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.u, "4*x^2");
        assert!(node_sigma_check(&m).unwrap());
    }

    #[test]
    fn branch_fixing_klein() {
        let z2 = ConstantGroup::cyclic(2).unwrap();
        let v = z2.product(&z2);
        let m = NodeModel::new(node_action(5, 8, v, &[2, 1], &[["-x", "y"], ["x", "-y"]])).unwrap();
        let d = m.decompose();
        assert!(d.psi.is_none());
        assert_eq!(d.delta_x, ["(e,e)", "(e,g^1)"]);
        let r = node_invariants_check(&m).unwrap();
        assert!(r.holds() && r.shape == QuotientShape::Node, "{r:?}");
        assert!(node_sigma_check(&m).is_err());
    }

    #[test]
    fn wild_branch_kernel_is_gated() {
        let m = NodeModel::new(node_action(
            2,
            6,
            ConstantGroup::cyclic(2).unwrap(),
            &[1],
            &[["x", "y + y^2 + y^3 + y^4 + y^5"]],
        ))
        .unwrap();
        assert!(node_invariants_check(&m).unwrap_err().is_gated());
    }

    #[test]
    fn smooth_tame_and_wild() {
        let a = smooth_algebra(&BaseRing::prime_field(7).unwrap(), "t", 9).unwrap();
        let phi = AlgebraAutomorphism::new(&a, vec![parse_element(&a, "2*t").unwrap()]).unwrap();
        let act = ConstantAction::new(&a, ConstantGroup::cyclic(3).unwrap(), &[1], vec![phi]).unwrap();
        let m = SmoothPointModel::new(Action::constant(act).unwrap()).unwrap();
        let r = smooth_invariants_check(&m).unwrap();
        assert!(r.equal && r.valuation == 3, "{r:?}");

        let a = smooth_algebra(&BaseRing::prime_field(2).unwrap(), "t", 8).unwrap();
        let img = parse_element(&a, "t + t^2 + t^3 + t^4 + t^5 + t^6 + t^7").unwrap();
        let phi = AlgebraAutomorphism::new(&a, vec![img]).unwrap();
        let act = ConstantAction::new(&a, ConstantGroup::cyclic(2).unwrap(), &[1], vec![phi]).unwrap();
        let m = SmoothPointModel::new(Action::constant(act).unwrap()).unwrap();
        let r = smooth_invariants_check(&m).unwrap();
        assert!(r.equal && r.valuation == 2, "{r:?}");
        assert!(cogenerated_check_smooth(&m).unwrap().equal);
    }

    #[test]
    fn non_free_smooth_rejected() {
        let a = smooth_algebra(&BaseRing::prime_field(5).unwrap(), "t", 6).unwrap();
        let act = ConstantAction::new(
            &a,
            ConstantGroup::cyclic(2).unwrap(),
            &[1],
            vec![AlgebraAutomorphism::identity(&a)],
        )
        .unwrap();
        assert!(matches!(
            SmoothPointModel::new(Action::constant(act).unwrap()),
            Err(Error::NotGenericallyFree(_))
        ));
    }
}
