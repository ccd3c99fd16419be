//! Invariant rings, Kleiman-Lonsted algebras and the reductions relating them.

use std::sync::Arc;

use serde::Serialize;

use crate::action::{Action, AlgebraAutomorphism, ConstantAction};
use crate::algebra::{Element, Monomial, NormalFormAlgebra, UniPoly};
use crate::error::{Error, Result};
use crate::group::ConstantGroup;
use crate::linalg::{self, Span};
use crate::ring::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpanLabel {
    Invariants,
    KleimanLonsted,
    Custom,
}

/// A subalgebra of a normal-form algebra, stored as a module span with algebra generators.
#[derive(Clone, Debug)]
pub struct SubalgebraSpan {
    alg: Arc<NormalFormAlgebra>,
    label: SpanLabel,
    span: Span,
    generators: Vec<Element>,
}

impl SubalgebraSpan {
    /// The subalgebra generated over the base by `gens`.
    pub fn generated_by(alg: &Arc<NormalFormAlgebra>, gens: &[Element], label: SpanLabel) -> Result<Self> {
        let mut c = Closure::new(alg)?;
        for g in gens {
            c.adjoin(g);
        }
        Ok(SubalgebraSpan { alg: alg.clone(), label, span: c.span, generators: gens.to_vec() })
    }

    /// Wraps a module that is already a subalgebra and extracts greedy algebra generators.
    pub fn from_module(alg: &Arc<NormalFormAlgebra>, module: &[Element], label: SpanLabel) -> Result<Self> {
        let span = Span::from_vectors(alg.base(), alg.dim(), module.iter().map(|e| e.coeffs().to_vec()))?;
        let mut s = SubalgebraSpan { alg: alg.clone(), label, span, generators: Vec::new() };
        if !s.is_closed() {
            return Err(Error::Structural("module is not closed under multiplication".into()));
        }
        s.generators = greedy_generators(alg, &s.module_basis())?;
        Ok(s)
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn label(&self) -> SpanLabel {
        self.label
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// Module generators in echelon order (a basis over a field).
    pub fn module_basis(&self) -> Vec<Element> {
        let mut v: Vec<Element> = self
            .span
            .echelon_generators()
            .into_iter()
            .map(|c| Element::from_coeffs(&self.alg, c))
            .collect();
        v.sort_by_key(leading_index);
        v
    }

    /// Length over the prime ring (the dimension over a prime field).
    pub fn length(&self) -> u32 {
        self.span.length()
    }

    pub fn contains(&self, a: &Element) -> bool {
        self.span.contains(a.coeffs())
    }

    pub fn includes(&self, other: &SubalgebraSpan) -> bool {
        self.span.includes(&other.span)
    }

    pub fn equals(&self, other: &SubalgebraSpan) -> bool {
        self.span.equals(&other.span)
    }

    pub fn is_closed(&self) -> bool {
        let basis = self.module_basis();
        basis.iter().all(|a| basis.iter().all(|b| self.contains(&(a * b))))
    }

    /// The span enlarged by every monomial of degree at least `degree`.
    pub fn modulo_degree(&self, degree: u32) -> Span {
        self.span.extended(high_monomials(&self.alg, degree))
    }

    /// Regenerates the algebra generators greedily from the module basis.
    pub fn with_greedy_generators(mut self) -> Result<Self> {
        self.generators = greedy_generators(&self.alg, &self.module_basis())?;
        Ok(self)
    }
}

fn leading_index(e: &Element) -> usize {
    e.terms().next().map_or(usize::MAX, |(i, _)| i)
}

/// Unit vectors of all basis monomials with graded degree at least `degree`.
pub fn high_monomials(alg: &Arc<NormalFormAlgebra>, degree: u32) -> Vec<Vec<Scalar>> {
    let base = alg.base();
    alg.basis()
        .iter()
        .enumerate()
        .filter(|(_, m)| alg.graded_degree(m) >= degree)
        .map(|(i, _)| {
            let mut v = vec![base.zero(); alg.dim()];
            v[i] = base.one();
            v
        })
        .collect()
}

/// Incremental algebra closure: every inserted vector is multiplied by every adjoined generator.
struct Closure {
    span: Span,
    members: Vec<Element>,
    gens: Vec<Element>,
}

impl Closure {
    fn new(alg: &Arc<NormalFormAlgebra>) -> Result<Self> {
        let mut span = Span::new(alg.base(), alg.dim())?;
        let one = Element::one(alg);
        span.insert(one.coeffs().to_vec());
        Ok(Closure { span, members: vec![one], gens: Vec::new() })
    }

    fn contains(&self, a: &Element) -> bool {
        self.span.contains(a.coeffs())
    }

    fn push(&mut self, a: Element, frontier: &mut Vec<Element>) {
        if !self.span.contains(a.coeffs()) {
            self.span.insert(a.coeffs().to_vec());
            self.members.push(a.clone());
            frontier.push(a);
        }
    }

    fn adjoin(&mut self, g: &Element) {
        // the span is an algebra after every call, so members need no new generator
        if self.contains(g) {
            return;
        }
        self.gens.push(g.clone());
        let mut frontier = Vec::new();
        let old = self.members.clone();
        for m in &old {
            self.push(m * g, &mut frontier);
        }
        self.push(g.clone(), &mut frontier);
        while let Some(f) = frontier.pop() {
            let gens = self.gens.clone();
            for s in &gens {
                self.push(&f * s, &mut frontier);
            }
        }
    }
}

/// Keeps a module generator iff it is not in the subalgebra generated by those kept before it.
fn greedy_generators(alg: &Arc<NormalFormAlgebra>, basis: &[Element]) -> Result<Vec<Element>> {
    let mut c = Closure::new(alg)?;
    let mut kept = Vec::new();
    for b in basis {
        if !c.contains(b) {
            c.adjoin(b);
            kept.push(b.clone());
        }
    }
    Ok(kept)
}

/// `A^G` as the kernel of `a -> mu*(a) - 1 (x) a`.
pub fn invariant_subring(action: &Action) -> Result<SubalgebraSpan> {
    let alg = action.algebra();
    let ker = linalg::kernel(alg.base(), &action.invariance_matrix(), alg.dim())?;
    let module: Vec<Element> = ker.into_iter().map(|v| Element::from_coeffs(alg, v)).collect();
    SubalgebraSpan::from_module(alg, &module, SpanLabel::Invariants)
}

/// `sigma_i(m)` for every basis monomial `m` and `1 <= i <= n`, as a flat list.
pub fn monomial_sigmas(action: &Action) -> Vec<Element> {
    let alg = action.algebra();
    let mut out = Vec::new();
    for i in 0..alg.dim() {
        out.extend(action.sigma(&Element::basis_element(alg, i)));
    }
    out
}

/// The Kleiman-Lonsted algebra generated by the sigma_i of basis monomials.
pub fn kl_subalgebra(action: &Action) -> Result<SubalgebraSpan> {
    let alg = action.algebra();
    let sigmas = monomial_sigmas(action);
    let s = SubalgebraSpan::generated_by(alg, &sigmas, SpanLabel::KleimanLonsted)?;
    s.with_greedy_generators()
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub equal: bool,
    pub witness: Option<String>,
    pub invariants_length: u32,
    pub kl_length: u32,
    /// Degree below which the comparison is certified; `None` when no guard applies.
    pub certified_degree: Option<u32>,
}

/// Compares two spans, optionally modulo all monomials of degree `>= guard`.
pub fn compare_spans(inv: &SubalgebraSpan, kl: &SubalgebraSpan, guard: Option<u32>) -> ComparisonReport {
    let (a, b) = match guard {
        Some(g) => (inv.modulo_degree(g), kl.modulo_degree(g)),
        None => (inv.span().clone(), kl.span().clone()),
    };
    let equal = a.equals(&b);
    let witness = if equal {
        None
    } else {
        inv.generators()
            .iter()
            .chain(inv.module_basis().iter())
            .find(|e| !b.contains(e.coeffs()))
            .map(|e| e.to_string())
    };
    ComparisonReport {
        equal,
        witness,
        invariants_length: inv.length(),
        kl_length: kl.length(),
        certified_degree: guard,
    }
}

pub fn compare(action: &Action) -> Result<ComparisonReport> {
    let inv = invariant_subring(action)?;
    let kl = kl_subalgebra(action)?;
    Ok(compare_spans(&inv, &kl, None))
}

/// `p^r`, the largest power of the residue characteristic dividing `|G|`.
pub fn p_part(action: &Action) -> u64 {
    let n = action.order() as u64;
    let p = action
        .algebra()
        .base()
        .residue_characteristic()
        .unwrap_or(0);
    if p < 2 {
        return 1;
    }
    let mut q = 1;
    while n.is_multiple_of(q * p) {
        q *= p;
    }
    q
}

/// Checks `a^{p^r}` lies in the Kleiman-Lonsted algebra for an invariant `a`.
pub fn gabber_power_check(action: &Action, kl: &SubalgebraSpan, a: &Element) -> Result<bool> {
    if !action.is_invariant(a) {
        return Err(Error::Precondition(format!("{a} is not invariant")));
    }
    Ok(kl.contains(&a.pow(p_part(action))))
}

/// Whether no nonidentity element of a constant action fixes a closed point of the model.
pub fn is_free_on_points(action: &ConstantAction) -> bool {
    let alg = action.algebra();
    let g = action.group();
    (0..g.order()).filter(|&x| x != g.identity()).all(|x| {
        (0..alg.copies()).all(|c| {
            let e = Element::idempotent(alg, c);
            action.apply(x, &e) != e
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Extraction {
    pub m: usize,
    pub ell: usize,
    /// `alpha_0 .. alpha_ell` of the quotient polynomial, low degree first.
    pub coefficients: Vec<String>,
    pub sigmas: Vec<String>,
    pub matches_direct: bool,
    pub power_identity: bool,
    #[serde(skip)]
    pub poly: Option<UniPoly>,
}

/// Recovers the characteristic polynomial of the `G/H` action from that of `G`
/// by decreasing induction on the coefficient index.
pub fn quotient_extraction(action: &ConstantAction, normal: &[usize], a: &Element) -> Result<Extraction> {
    let group = action.group();
    if !group.is_normal(normal) {
        return Err(Error::InvalidGroup("H is not a normal subgroup".into()));
    }
    let m = normal.len();
    let base = action.algebra().base();
    let m_inv = base
        .inv(&base.from_i64(m as i64))
        .ok_or(Error::ExtractionRequiresInvertible(m))?;
    let (quot, _) = action.quotient(normal)?;
    let n = group.order();
    let ell = n / m;
    let full = Action::constant(action.clone())?;
    let chi = full.char_poly(a);
    let alg = action.algebra();
    let mut alpha: Vec<Element> = vec![Element::zero(alg); ell + 1];
    alpha[ell] = Element::one(alg);
    for u in (0..ell).rev() {
        let j = ell * (m - 1) + u;
        let higher = UniPoly::new(alg, (0..=ell).map(|i| if i > u { alpha[i].clone() } else { Element::zero(alg) }).collect());
        let rest = higher.pow(m as u32).coeff(j);
        alpha[u] = (&chi.coeff(j) - &rest).scale(&m_inv);
    }
    let extracted = UniPoly::new(alg, alpha.clone());
    let direct = Action::constant(quot)?.char_poly(a);
    Ok(Extraction {
        m,
        ell,
        coefficients: alpha.iter().map(|e| e.to_string()).collect(),
        sigmas: extracted.sigmas().iter().map(|e| e.to_string()).collect(),
        matches_direct: extracted == direct,
        power_identity: extracted.pow(m as u32) == chi,
        poly: Some(extracted),
    })
}

/// `Ind_H^G(C)` realized as a product of copies of `C` indexed by left cosets.
#[derive(Clone, Debug)]
pub struct InducedData {
    pub source: Arc<NormalFormAlgebra>,
    pub source_action: ConstantAction,
    pub algebra: Arc<NormalFormAlgebra>,
    pub action: ConstantAction,
    /// Left cosets of `H`; coset 0 is `H` itself.
    pub cosets: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    pub subgroup: Vec<usize>,
}

/// Places an element of `C` in factor `c` of the product algebra.
pub fn embed_component(target: &Arc<NormalFormAlgebra>, e: &Element, c: usize) -> Element {
    let mut coeffs = vec![target.base().zero(); target.dim()];
    for (i, s) in e.terms() {
        let m = &e.algebra().basis()[i];
        let idx = target
            .index_of(&Monomial { copy: c, exps: m.exps.clone() })
            .expect("same presentation");
        coeffs[idx] = s.clone();
    }
    Element::from_coeffs(target, coeffs)
}

/// Restriction of an element of the product algebra to factor `c`.
pub fn project_component(source: &Arc<NormalFormAlgebra>, e: &Element, c: usize) -> Element {
    let mut coeffs = vec![source.base().zero(); source.dim()];
    for (i, s) in e.terms() {
        let m = &e.algebra().basis()[i];
        if m.copy == c {
            let idx = source
                .index_of(&Monomial { copy: 0, exps: m.exps.clone() })
                .expect("same presentation");
            coeffs[idx] = s.clone();
        }
    }
    Element::from_coeffs(source, coeffs)
}

/// Builds the induced algebra and its `G`-action. `h_action` is an action of the
/// subgroup (as returned by [`ConstantGroup::subgroup_as_group`]) on `C`.
pub fn induced_action(group: &ConstantGroup, subgroup: &[usize], h_action: &ConstantAction) -> Result<InducedData> {
    let (hg, incl) = group.subgroup_as_group(subgroup)?;
    if hg.order() != h_action.group().order() {
        return Err(Error::InvalidAction("subgroup action has the wrong order".into()));
    }
    let c = h_action.algebra();
    if c.copies() != 1 {
        return Err(Error::Structural("induction needs a single-copy algebra".into()));
    }
    let cosets = group.left_cosets(&incl);
    let k = cosets.len();
    let representatives: Vec<usize> = cosets
        .iter()
        .enumerate()
        .map(|(i, cs)| if i == 0 { group.identity() } else { cs[0] })
        .collect();
    let a = c.with_copies(k)?;
    let coset_of = |g: usize| cosets.iter().position(|cs| cs.contains(&g)).expect("partition");
    let h_index = |g: usize| incl.iter().position(|&x| x == g).expect("in subgroup");
    let nv = c.variables().len();
    let gens = group.generators();
    let mut images = Vec::new();
    for &g in &gens {
        // g r_alpha = r_beta h
        let mut imgs = Vec::new();
        for alpha in 0..k {
            let y = group.mul(g, representatives[alpha]);
            let beta = coset_of(y);
            let h = group.mul(group.inv(representatives[beta]), y);
            let hphi = h_action.automorphism(h_index(h));
            if k > 1 {
                imgs.push((alpha, Element::idempotent(&a, beta), Vec::new()));
            }
            let vars: Vec<Element> = (0..nv).map(|v| embed_component(&a, &hphi.images()[v], beta)).collect();
            if k > 1 {
                imgs.last_mut().unwrap().2 = vars;
            } else {
                imgs.push((alpha, Element::zero(&a), vars));
            }
        }
        let flat: Vec<Element> = if k > 1 {
            imgs.into_iter().flat_map(|(_, e, vs)| std::iter::once(e).chain(vs)).collect()
        } else {
            imgs.into_iter().flat_map(|(_, _, vs)| vs).collect()
        };
        images.push(AlgebraAutomorphism::new(&a, flat)?);
    }
    let action = ConstantAction::new(&a, group.clone(), &gens, images)?;
    Ok(InducedData {
        source: c.clone(),
        source_action: h_action.clone(),
        algebra: a,
        action,
        cosets,
        representatives,
        subgroup: incl,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedReport {
    pub char_poly_identity: bool,
    pub invariants_match: bool,
    pub kl_match: bool,
    pub chi_g: String,
}

impl InducedReport {
    pub fn holds(&self) -> bool {
        self.char_poly_identity && self.invariants_match && self.kl_match
    }
}

/// Checks the coset-product formula for `chi_G(f)` with `f` in the origin factor,
/// and that projection to the origin factor carries `A^G` onto `C^H` and `Sigma^G` onto `Sigma^H`.
pub fn induced_identities_check(data: &InducedData, f: &Element) -> Result<InducedReport> {
    let a = &data.algebra;
    let c = &data.source;
    if !f.same_parent(&Element::zero(a)) {
        return Err(Error::ParentMismatch);
    }
    let origin = embed_component(a, &project_component(c, f, 0), 0);
    if origin != *f {
        return Err(Error::Precondition("f must be supported in the origin factor".into()));
    }
    let g_act = Action::constant(data.action.clone())?;
    let h_act = Action::constant(data.source_action.clone())?;
    let chi_g = g_act.char_poly(f);
    let chi_h = h_act.char_poly(&project_component(c, f, 0));
    let m = data.source_action.group().order();
    let e0 = Element::idempotent(a, 0);
    let rest = &Element::one(a) - &e0;
    // chi_H on the origin factor, T^m elsewhere
    let mut coeffs: Vec<Element> = (0..=m).map(|i| embed_component(a, &chi_h.coeff(i), 0)).collect();
    coeffs[m] = &coeffs[m] + &rest;
    let lifted = UniPoly::new(a, coeffs);
    let mut rhs = UniPoly::constant(Element::one(a));
    for &r in &data.representatives {
        rhs = rhs.mul(&lifted.map(|e| data.action.apply(r, e)));
    }
    let char_poly_identity = rhs == chi_g;

    let project_span = |s: &SubalgebraSpan| -> Result<Span> {
        Span::from_vectors(
            c.base(),
            c.dim(),
            s.module_basis().iter().map(|e| project_component(c, e, 0).into_coeffs()),
        )
    };
    let inv_g = invariant_subring(&g_act)?;
    let inv_h = invariant_subring(&h_act)?;
    let invariants_match = project_span(&inv_g)?.equals(inv_h.span());
    let kl_g = kl_subalgebra(&g_act)?;
    let kl_h = kl_subalgebra(&h_act)?;
    let kl_match = project_span(&kl_g)?.equals(kl_h.span());
    Ok(InducedReport { char_poly_identity, invariants_match, kl_match, chi_g: chi_g.to_string() })
}
