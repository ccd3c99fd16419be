//! Group and group-scheme actions on normal-form algebras.
//!
//! Every action is presented dually by a coaction `A -> R[G] (x) A`, where
//! `R[G]` is a monomial-type Hopf algebra with a distinguished basis:
//! functions `e_g` on a constant group, truncated polynomials `X^i` for
//! the height-one group attached to commuting p-nilpotent derivations, or
//! products of the two. Norms and characteristic polynomials are
//! determinants of multiplication by the coaction on this free `A`-module.

use std::sync::{Arc, OnceLock};

use crate::algebra::{Element, NormalFormAlgebra, PolyExtension, UniPoly};
use crate::det;
use crate::error::{Error, Result};
use crate::group::ConstantGroup;
use crate::linalg;
use crate::ring::{is_prime, Scalar};

/// A ring endomorphism of an algebra, determined by the images of its generators.
#[derive(Clone, Debug)]
pub struct AlgebraAutomorphism {
    alg: Arc<NormalFormAlgebra>,
    images: Vec<Element>,
    basis_images: Vec<Element>,
}

impl PartialEq for AlgebraAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.basis_images == other.basis_images
    }
}

impl AlgebraAutomorphism {
    /// `images` follows the order of [`NormalFormAlgebra::generators`].
    pub fn new(alg: &Arc<NormalFormAlgebra>, images: Vec<Element>) -> Result<Self> {
        let gens = alg.generators();
        if images.len() != gens.len() {
            return Err(Error::InvalidAction(format!(
                "expected {} generator images, got {}",
                gens.len(),
                images.len()
            )));
        }
        if images.iter().any(|e| !e.same_parent(&gens[0].1)) {
            return Err(Error::ParentMismatch);
        }
        let basis_images = basis_images(alg, &images);
        let phi = AlgebraAutomorphism { alg: alg.clone(), images, basis_images };
        phi.verify(&gens)?;
        Ok(phi)
    }

    pub fn identity(alg: &Arc<NormalFormAlgebra>) -> Self {
        let images: Vec<Element> = alg.generators().into_iter().map(|(_, e)| e).collect();
        let basis_images = (0..alg.dim()).map(|i| Element::basis_element(alg, i)).collect();
        AlgebraAutomorphism { alg: alg.clone(), images, basis_images }
    }

    /// Builds from `(generator name, image)` pairs; unnamed generators are fixed.
    pub fn from_named(alg: &Arc<NormalFormAlgebra>, named: &[(String, Element)]) -> Result<Self> {
        let gens = alg.generators();
        for (n, _) in named {
            if !gens.iter().any(|(g, _)| g == n) {
                return Err(Error::UnknownVariable(n.clone()));
            }
        }
        let images = gens
            .into_iter()
            .map(|(name, e)| named.iter().find(|(n, _)| *n == name).map_or(e, |(_, img)| img.clone()))
            .collect();
        AlgebraAutomorphism::new(alg, images)
    }

    fn verify(&self, gens: &[(String, Element)]) -> Result<()> {
        let alg = &self.alg;
        if alg.copies() > 1 {
            let total = self.images.iter().step_by(alg.variables().len() + 1).fold(Element::zero(alg), |a, e| &a + e);
            if total != Element::one(alg) {
                return Err(Error::InvalidAction("images of the idempotents do not sum to 1".into()));
            }
        }
        // multiplicativity on basis x generators forces a well-defined ring map
        for (i, bi) in self.basis_images.iter().enumerate() {
            let b = Element::basis_element(alg, i);
            for (k, (name, g)) in gens.iter().enumerate() {
                let lhs = self.apply(&(&b * g));
                let rhs = bi * &self.images[k];
                if lhs != rhs {
                    return Err(Error::InvalidAction(format!(
                        "map is not multiplicative on {} * {name}: the image of a vanishing monomial is nonzero",
                        alg.format_monomial(&alg.basis()[i])
                    )));
                }
            }
        }
        if !linalg::is_invertible(alg.base(), &self.matrix())? {
            return Err(Error::InvalidAction("map is not invertible".into()));
        }
        Ok(())
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    /// Matrix whose column `j` holds the image of basis element `j`.
    pub fn matrix(&self) -> Vec<Vec<Scalar>> {
        let n = self.alg.dim();
        (0..n).map(|i| (0..n).map(|j| self.basis_images[j].coeff(i).clone()).collect()).collect()
    }

    pub fn apply(&self, a: &Element) -> Element {
        let mut acc = Element::zero(&self.alg);
        for (i, c) in a.terms() {
            acc = &acc + &self.basis_images[i].scale(c);
        }
        acc
    }

    /// `self o other`.
    pub fn compose(&self, other: &AlgebraAutomorphism) -> AlgebraAutomorphism {
        let images = other.images.iter().map(|e| self.apply(e)).collect();
        let basis_images = other.basis_images.iter().map(|e| self.apply(e)).collect();
        AlgebraAutomorphism { alg: self.alg.clone(), images, basis_images }
    }

    pub fn is_identity(&self) -> bool {
        self.basis_images
            .iter()
            .enumerate()
            .all(|(i, e)| *e == Element::basis_element(&self.alg, i))
    }

    /// Transports the map to `target` (same presentation, new base) through a coefficient map.
    pub fn map_base(&self, target: &Arc<NormalFormAlgebra>, f: &dyn Fn(&Scalar) -> Scalar) -> Result<Self> {
        let images = self.images.iter().map(|e| e.map_coeffs(target, f)).collect();
        AlgebraAutomorphism::new(target, images)
    }
}

fn basis_images(alg: &Arc<NormalFormAlgebra>, images: &[Element]) -> Vec<Element> {
    let nv = alg.variables().len();
    let k = alg.copies();
    let mut out: Vec<Element> = Vec::with_capacity(alg.dim());
    for (idx, m) in alg.basis().iter().enumerate() {
        let gen_of = |var: usize| if k == 1 { var } else { m.copy * (nv + 1) + 1 + var };
        let img = match m.exps.iter().position(|&e| e > 0) {
            None => {
                if k == 1 {
                    Element::one(alg)
                } else {
                    images[m.copy * (nv + 1)].clone()
                }
            }
            Some(v) => {
                let mut prev = m.clone();
                prev.exps[v] -= 1;
                let pi = alg.index_of(&prev).expect("divisors of basis monomials survive");
                debug_assert!(pi < idx);
                &out[pi] * &images[gen_of(v)]
            }
        };
        out.push(img);
    }
    out
}

/// A derivation of a single-copy algebra, given by the images of its variables.
#[derive(Clone, Debug)]
pub struct Derivation {
    alg: Arc<NormalFormAlgebra>,
    images: Vec<Element>,
    basis_images: Vec<Element>,
}

impl Derivation {
    pub fn new(alg: &Arc<NormalFormAlgebra>, images: Vec<Element>) -> Result<Self> {
        if alg.copies() != 1 {
            return Err(Error::Structural("derivations are supported on single-copy algebras".into()));
        }
        let nv = alg.variables().len();
        if images.len() != nv {
            return Err(Error::InvalidAction(format!("expected {nv} variable images")));
        }
        let vars: Vec<Element> = (0..nv).map(|i| Element::variable_at(alg, i, 0)).collect();
        let mut basis_images: Vec<Element> = Vec::with_capacity(alg.dim());
        for m in alg.basis() {
            let img = match m.exps.iter().position(|&e| e > 0) {
                None => Element::zero(alg),
                Some(v) => {
                    let mut prev = m.clone();
                    prev.exps[v] -= 1;
                    let pi = alg.index_of(&prev).expect("divisors of basis monomials survive");
                    let b = Element::basis_element(alg, pi);
                    &(&basis_images[pi] * &vars[v]) + &(&b * &images[v])
                }
            };
            basis_images.push(img);
        }
        let d = Derivation { alg: alg.clone(), images, basis_images };
        // Leibniz on basis x variables: D preserves the ideal being divided out
        for i in 0..alg.dim() {
            let b = Element::basis_element(alg, i);
            for (v, x) in vars.iter().enumerate() {
                let lhs = d.apply(&(&b * x));
                let rhs = &(&d.basis_images[i] * x) + &(&b * &d.images[v]);
                if lhs != rhs {
                    return Err(Error::InvalidAction(format!(
                        "derivation does not preserve the relations (at {} * {})",
                        alg.format_monomial(&alg.basis()[i]),
                        alg.variables()[v].name
                    )));
                }
            }
        }
        Ok(d)
    }

    pub fn zero(alg: &Arc<NormalFormAlgebra>) -> Result<Self> {
        let nv = alg.variables().len();
        Derivation::new(alg, vec![Element::zero(alg); nv])
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn apply(&self, a: &Element) -> Element {
        let mut acc = Element::zero(&self.alg);
        for (i, c) in a.terms() {
            acc = &acc + &self.basis_images[i].scale(c);
        }
        acc
    }

    pub fn apply_pow(&self, a: &Element, k: u32) -> Element {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.apply(&x);
        }
        x
    }

    pub fn is_nilpotent_of_order(&self, p: u32) -> bool {
        (0..self.alg.dim()).all(|i| self.apply_pow(&Element::basis_element(&self.alg, i), p).is_zero())
    }

    pub fn commutes_with(&self, other: &Derivation) -> bool {
        self.basis_images
            .iter()
            .zip(&other.basis_images)
            .all(|(a, b)| other.apply(a) == self.apply(b))
    }

    pub fn map_base(&self, target: &Arc<NormalFormAlgebra>, f: &dyn Fn(&Scalar) -> Scalar) -> Result<Self> {
        Derivation::new(target, self.images.iter().map(|e| e.map_coeffs(target, f)).collect())
    }
}

/// A constant finite group acting by automorphisms.
#[derive(Clone, Debug)]
pub struct ConstantAction {
    group: ConstantGroup,
    alg: Arc<NormalFormAlgebra>,
    autos: Vec<AlgebraAutomorphism>,
    kernel: Vec<usize>,
}

impl ConstantAction {
    /// Materializes the action from images of group generators and verifies it.
    pub fn new(
        alg: &Arc<NormalFormAlgebra>,
        group: ConstantGroup,
        generators: &[usize],
        images: Vec<AlgebraAutomorphism>,
    ) -> Result<Self> {
        if generators.len() != images.len() {
            return Err(Error::InvalidAction("one image per group generator is required".into()));
        }
        if group.generated_subgroup(generators).len() != group.order() {
            return Err(Error::InvalidAction("the listed elements do not generate the group".into()));
        }
        let n = group.order();
        let mut autos: Vec<Option<AlgebraAutomorphism>> = vec![None; n];
        autos[group.identity()] = Some(AlgebraAutomorphism::identity(alg));
        let mut frontier = vec![group.identity()];
        while let Some(x) = frontier.pop() {
            for (g, img) in generators.iter().zip(&images) {
                let y = group.mul(x, *g);
                let cand = autos[x].as_ref().unwrap().compose(img);
                match &autos[y] {
                    Some(existing) => {
                        if *existing != cand {
                            return Err(Error::InvalidAction(format!(
                                "images violate a group relation at {}",
                                group.label(y)
                            )));
                        }
                    }
                    None => {
                        autos[y] = Some(cand);
                        frontier.push(y);
                    }
                }
            }
        }
        let autos: Vec<AlgebraAutomorphism> = autos.into_iter().map(|a| a.expect("generated")).collect();
        for a in 0..n {
            for b in 0..n {
                if autos[group.mul(a, b)] != autos[a].compose(&autos[b]) {
                    return Err(Error::InvalidAction(format!(
                        "not a homomorphism at ({}, {})",
                        group.label(a),
                        group.label(b)
                    )));
                }
            }
        }
        let kernel = (0..n).filter(|&g| autos[g].is_identity()).collect();
        Ok(ConstantAction { group, alg: alg.clone(), autos, kernel })
    }

    pub fn trivial(alg: &Arc<NormalFormAlgebra>) -> Self {
        ConstantAction {
            group: ConstantGroup::trivial(),
            alg: alg.clone(),
            autos: vec![AlgebraAutomorphism::identity(alg)],
            kernel: vec![0],
        }
    }

    pub fn group(&self) -> &ConstantGroup {
        &self.group
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn automorphism(&self, g: usize) -> &AlgebraAutomorphism {
        &self.autos[g]
    }

    pub fn apply(&self, g: usize, a: &Element) -> Element {
        self.autos[g].apply(a)
    }

    /// Elements acting as the identity.
    pub fn kernel(&self) -> &[usize] {
        &self.kernel
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel.len() == 1
    }

    pub fn restrict(&self, sub: &[usize]) -> Result<ConstantAction> {
        let (h, incl) = self.group.subgroup_as_group(sub)?;
        let autos: Vec<AlgebraAutomorphism> = incl.iter().map(|&g| self.autos[g].clone()).collect();
        let kernel = (0..h.order()).filter(|&i| autos[i].is_identity()).collect();
        Ok(ConstantAction { group: h, alg: self.alg.clone(), autos, kernel })
    }

    /// The induced action of `G/N` when `N` is normal and acts trivially.
    pub fn quotient(&self, normal: &[usize]) -> Result<(ConstantAction, Vec<usize>)> {
        if normal.iter().any(|&h| !self.autos[h].is_identity()) {
            return Err(Error::Precondition("the subgroup does not act trivially".into()));
        }
        let (q, proj) = self.group.quotient(normal)?;
        let mut autos: Vec<Option<AlgebraAutomorphism>> = vec![None; q.order()];
        for g in 0..self.group.order() {
            if autos[proj[g]].is_none() {
                autos[proj[g]] = Some(self.autos[g].clone());
            }
        }
        let autos: Vec<AlgebraAutomorphism> = autos.into_iter().map(|a| a.expect("surjective")).collect();
        let kernel = (0..q.order()).filter(|&i| autos[i].is_identity()).collect();
        Ok((ConstantAction { group: q, alg: self.alg.clone(), autos, kernel }, proj))
    }

    pub fn map_base(&self, target: &Arc<NormalFormAlgebra>, f: &dyn Fn(&Scalar) -> Scalar) -> Result<Self> {
        let gens = self.group.generators();
        let imgs = gens
            .iter()
            .map(|&g| self.autos[g].map_base(target, f))
            .collect::<Result<Vec<_>>>()?;
        ConstantAction::new(target, self.group.clone(), &gens, imgs)
    }

    /// Orbit-product oracle `prod_g (T - g(a))`.
    pub fn orbit_char_poly(&self, a: &Element) -> UniPoly {
        let mut acc = UniPoly::constant(Element::one(&self.alg));
        for g in 0..self.group.order() {
            acc = acc.mul(&UniPoly::linear(&self.apply(g, a)));
        }
        acc
    }
}

/// Height-one infinitesimal group scheme `alpha_p^r` acting through commuting
/// p-nilpotent derivations `D_1..D_r`.
#[derive(Clone, Debug)]
pub struct HopfAction {
    alg: Arc<NormalFormAlgebra>,
    p: u32,
    derivations: Vec<Derivation>,
    // multi-indices of the basis X^i of k[X_1..X_r]/(X_j^p)
    indices: Vec<Vec<u32>>,
}

impl HopfAction {
    pub fn new(alg: &Arc<NormalFormAlgebra>, derivations: Vec<Derivation>) -> Result<Self> {
        let p = alg.base().characteristic();
        if p == 0 || !is_prime(p) {
            return Err(Error::Structural(format!(
                "alpha_p actions need a base of prime characteristic, got {}",
                alg.base().spec()
            )));
        }
        if derivations.is_empty() {
            return Err(Error::InvalidAction("at least one derivation is required".into()));
        }
        let p = p as u32;
        for (i, d) in derivations.iter().enumerate() {
            if !d.is_nilpotent_of_order(p) {
                return Err(Error::NotNilpotent(format!("D_{} ^ {p} != 0", i + 1)));
            }
            for (j, e) in derivations.iter().enumerate().skip(i + 1) {
                if !d.commutes_with(e) {
                    return Err(Error::InvalidAction(format!("D_{} and D_{} do not commute", i + 1, j + 1)));
                }
            }
        }
        let r = derivations.len();
        let mut indices = vec![vec![]];
        for _ in 0..r {
            indices = indices
                .into_iter()
                .flat_map(|ix| {
                    (0..p).map(move |k| {
                        let mut v = ix.clone();
                        v.push(k);
                        v
                    })
                })
                .collect();
        }
        indices.sort_by(|a, b| crate::algebra::grlex(a, b));
        Ok(HopfAction { alg: alg.clone(), p, derivations, indices })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn height_rank(&self) -> usize {
        self.derivations.len()
    }

    pub fn derivations(&self) -> &[Derivation] {
        &self.derivations
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    /// `D^i(a) / i!` for a multi-index `i`.
    pub fn divided_power(&self, a: &Element, ix: &[u32]) -> Element {
        let base = self.alg.base();
        let mut x = a.clone();
        let mut fact = base.one();
        for (d, &k) in self.derivations.iter().zip(ix) {
            x = d.apply_pow(&x, k);
            for j in 1..=k {
                fact = base.mul(&fact, &base.from_i64(j as i64));
            }
        }
        let inv = base.inv(&fact).expect("i! is invertible for i < p");
        x.scale(&inv)
    }

    pub fn map_base(&self, target: &Arc<NormalFormAlgebra>, f: &dyn Fn(&Scalar) -> Scalar) -> Result<Self> {
        let ds = self.derivations.iter().map(|d| d.map_base(target, f)).collect::<Result<Vec<_>>>()?;
        HopfAction::new(target, ds)
    }
}

/// Direct product `alpha_p^r x G_red` of commuting actions.
#[derive(Clone, Debug)]
pub struct ProductAction {
    infinitesimal: HopfAction,
    etale: ConstantAction,
}

impl ProductAction {
    pub fn new(infinitesimal: HopfAction, etale: ConstantAction) -> Result<Self> {
        if infinitesimal.alg != etale.alg {
            return Err(Error::ParentMismatch);
        }
        let alg = &etale.alg;
        for g in etale.group.generators() {
            for d in &infinitesimal.derivations {
                for i in 0..alg.dim() {
                    let b = Element::basis_element(alg, i);
                    if d.apply(&etale.apply(g, &b)) != etale.apply(g, &d.apply(&b)) {
                        return Err(Error::UnsupportedComposite(
                            "the infinitesimal and etale parts do not commute (twisted semi-direct product)".into(),
                        ));
                    }
                }
            }
        }
        Ok(ProductAction { infinitesimal, etale })
    }

    pub fn infinitesimal(&self) -> &HopfAction {
        &self.infinitesimal
    }

    pub fn etale(&self) -> &ConstantAction {
        &self.etale
    }
}

#[derive(Clone, Debug)]
pub enum ActionKind {
    Constant(ConstantAction),
    Hopf(HopfAction),
    Product(ProductAction),
}

/// The coordinate ring `R[G]` as a monomial algebra with a distinguished basis.
#[derive(Clone, Debug)]
pub struct HopfBasis {
    pub labels: Vec<String>,
    // product of basis elements, None when it vanishes
    pub table: Vec<Vec<Option<usize>>>,
    /// Coordinates of the unit.
    pub unit: Vec<bool>,
    /// Basis element on which the counit is 1 (all others map to 0).
    pub counit: usize,
}

/// A finite group scheme action with its coaction, norm and characteristic polynomials.
#[derive(Debug)]
pub struct Action {
    kind: ActionKind,
    alg: Arc<NormalFormAlgebra>,
    hopf: HopfBasis,
    // coaction of each basis monomial of A, one element per Hopf basis element
    coaction: Vec<Vec<Element>>,
    ext: OnceLock<PolyExtension>,
}

impl Clone for Action {
    fn clone(&self) -> Self {
        Action::from_kind(self.kind.clone()).expect("already validated")
    }
}

impl Action {
    pub fn from_kind(kind: ActionKind) -> Result<Self> {
        let (alg, hopf) = match &kind {
            ActionKind::Constant(c) => (c.alg.clone(), constant_hopf(&c.group)),
            ActionKind::Hopf(h) => (h.alg.clone(), infinitesimal_hopf(h.p, &h.indices)),
            ActionKind::Product(pa) => (
                pa.etale.alg.clone(),
                product_hopf(&infinitesimal_hopf(pa.infinitesimal.p, &pa.infinitesimal.indices), &constant_hopf(&pa.etale.group)),
            ),
        };
        let mut coaction = Vec::with_capacity(alg.dim());
        for i in 0..alg.dim() {
            let b = Element::basis_element(&alg, i);
            let c: Vec<Element> = match &kind {
                ActionKind::Constant(c) => (0..c.group.order()).map(|g| c.apply(g, &b)).collect(),
                ActionKind::Hopf(h) => h.indices.iter().map(|ix| h.divided_power(&b, ix)).collect(),
                ActionKind::Product(pa) => {
                    let h = &pa.infinitesimal;
                    let mut v = Vec::new();
                    for ix in &h.indices {
                        for g in 0..pa.etale.group.order() {
                            v.push(h.divided_power(&pa.etale.apply(g, &b), ix));
                        }
                    }
                    v
                }
            };
            coaction.push(c);
        }
        let act = Action { kind, alg, hopf, coaction, ext: OnceLock::new() };
        act.verify_coaction()?;
        Ok(act)
    }

    pub fn constant(c: ConstantAction) -> Result<Self> {
        Action::from_kind(ActionKind::Constant(c))
    }

    pub fn hopf(h: HopfAction) -> Result<Self> {
        Action::from_kind(ActionKind::Hopf(h))
    }

    pub fn product(p: ProductAction) -> Result<Self> {
        Action::from_kind(ActionKind::Product(p))
    }

    pub fn trivial(alg: &Arc<NormalFormAlgebra>) -> Self {
        Action::constant(ConstantAction::trivial(alg)).expect("trivial action")
    }

    fn verify_coaction(&self) -> Result<()> {
        let alg = &self.alg;
        // counit
        for i in 0..alg.dim() {
            if self.coaction[i][self.hopf.counit] != Element::basis_element(alg, i) {
                return Err(Error::InvalidAction("counit is not compatible with the coaction".into()));
            }
        }
        // algebra map on basis x variables
        let gens = alg.generators();
        for i in 0..alg.dim() {
            let b = Element::basis_element(alg, i);
            for (_, g) in &gens {
                let lhs = self.coaction(&(&b * g));
                let rhs = self.hopf_mul(&self.coaction[i], &self.coaction(g));
                if lhs != rhs {
                    return Err(Error::InvalidAction("coaction is not an algebra map".into()));
                }
            }
        }
        if let ActionKind::Hopf(h) = &self.kind {
            check_coassociative(h)?;
        }
        Ok(())
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn hopf_basis(&self) -> &HopfBasis {
        &self.hopf
    }

    /// `n = |G|`, the rank of `R[G]`.
    pub fn order(&self) -> usize {
        self.hopf.labels.len()
    }

    pub fn as_constant(&self) -> Option<&ConstantAction> {
        match &self.kind {
            ActionKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// `(p^r, G_red)`: the infinitesimal rank and the etale part when present.
    pub fn split_orders(&self) -> (usize, usize) {
        match &self.kind {
            ActionKind::Constant(c) => (1, c.group.order()),
            ActionKind::Hopf(h) => (h.rank(), 1),
            ActionKind::Product(pa) => (pa.infinitesimal.rank(), pa.etale.group.order()),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ActionKind::Constant(c) => format!("constant group of order {}", c.group.order()),
            ActionKind::Hopf(h) => format!("alpha_{}^{}", h.p, h.height_rank()),
            ActionKind::Product(pa) => format!(
                "alpha_{}^{} x constant group of order {}",
                pa.infinitesimal.p,
                pa.infinitesimal.height_rank(),
                pa.etale.group.order()
            ),
        }
    }

    /// `mu*(a)` as coefficients over the Hopf basis.
    pub fn coaction(&self, a: &Element) -> Vec<Element> {
        let mut out = vec![Element::zero(&self.alg); self.order()];
        for (i, c) in a.terms() {
            for (h, e) in self.coaction[i].iter().enumerate() {
                out[h] = &out[h] + &e.scale(c);
            }
        }
        out
    }

    fn hopf_mul(&self, x: &[Element], y: &[Element]) -> Vec<Element> {
        let n = self.order();
        let mut out = vec![Element::zero(&self.alg); n];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if let Some(k) = self.hopf.table[i][j] {
                    out[k] = &out[k] + &(a * b);
                }
            }
        }
        out
    }

    pub fn is_invariant(&self, a: &Element) -> bool {
        let c = self.coaction(a);
        c.iter().zip(&self.hopf.unit).all(|(e, &u)| if u { e == a } else { e.is_zero() })
    }

    /// The map `a -> mu*(a) - 1 (x) a`, as a matrix with `order * dim` rows.
    pub fn invariance_matrix(&self) -> Vec<Vec<Scalar>> {
        let dim = self.alg.dim();
        let n = self.order();
        let base = self.alg.base();
        let mut m = vec![vec![base.zero(); dim]; n * dim];
        for j in 0..dim {
            for h in 0..n {
                let e = &self.coaction[j][h];
                for (i, c) in e.terms() {
                    m[h * dim + i][j] = c.clone();
                }
                if self.hopf.unit[h] {
                    m[h * dim + j][j] = base.sub(&m[h * dim + j][j], &base.one());
                }
            }
        }
        m
    }

    /// Matrix of multiplication by `mu*(a)` on `R[G] (x) A` over `A`.
    pub fn multiplication_matrix(&self, a: &Element) -> Vec<Vec<Element>> {
        let n = self.order();
        let c = self.coaction(a);
        let mut m = vec![vec![Element::zero(&self.alg); n]; n];
        for (h, e) in c.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            for col in 0..n {
                if let Some(row) = self.hopf.table[h][col] {
                    m[row][col] = &m[row][col] + e;
                }
            }
        }
        m
    }

    pub fn norm(&self, a: &Element) -> Element {
        det::determinant(&self.alg, &self.multiplication_matrix(a)).expect("square")
    }

    fn poly_ext(&self) -> &PolyExtension {
        self.ext
            .get_or_init(|| PolyExtension::new(&self.alg, self.order()).expect("A[T] fits under the dimension cap"))
    }

    /// `chi_a(T) = N(T - a)`, computed as a determinant over `A[T]`.
    pub fn char_poly(&self, a: &Element) -> UniPoly {
        let ext = self.poly_ext();
        let m = self.multiplication_matrix(a);
        let t = ext.t();
        let n = self.order();
        let mt: Vec<Vec<Element>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = -&ext.embed(&m[i][j]);
                        if i == j {
                            &e + &t
                        } else {
                            e
                        }
                    })
                    .collect()
            })
            .collect();
        let d = det::determinant(ext.algebra(), &mt).expect("square");
        ext.to_poly(&d)
    }

    /// `sigma_1(a) .. sigma_n(a)`.
    pub fn sigma(&self, a: &Element) -> Vec<Element> {
        self.char_poly(a).sigmas()
    }

    pub fn cayley_hamilton_check(&self, a: &Element) -> bool {
        self.char_poly(a).eval(a).is_zero()
    }

    /// `chi_G = chi_{G_red}^{p^r}` for split actions.
    pub fn etale_power_identity_check(&self, a: &Element) -> Result<bool> {
        let chi = self.char_poly(a);
        let (pr, _) = self.split_orders();
        let red = match &self.kind {
            ActionKind::Constant(_) => return Ok(true),
            ActionKind::Hopf(_) => UniPoly::linear(a),
            ActionKind::Product(pa) => pa.etale.orbit_char_poly(a),
        };
        Ok(chi == red.pow(pr as u32))
    }

    /// Transports the action along a coefficient map onto `target`.
    pub fn map_base(&self, target: &Arc<NormalFormAlgebra>, f: &dyn Fn(&Scalar) -> Scalar) -> Result<Action> {
        let kind = match &self.kind {
            ActionKind::Constant(c) => ActionKind::Constant(c.map_base(target, f)?),
            ActionKind::Hopf(h) => ActionKind::Hopf(h.map_base(target, f)?),
            ActionKind::Product(pa) => ActionKind::Product(ProductAction::new(
                pa.infinitesimal.map_base(target, f)?,
                pa.etale.map_base(target, f)?,
            )?),
        };
        Action::from_kind(kind)
    }
}

fn constant_hopf(g: &ConstantGroup) -> HopfBasis {
    let n = g.order();
    HopfBasis {
        labels: g.labels().iter().map(|l| format!("e[{l}]")).collect(),
        table: (0..n).map(|i| (0..n).map(|j| (i == j).then_some(i)).collect()).collect(),
        unit: vec![true; n],
        counit: g.identity(),
    }
}

fn infinitesimal_hopf(p: u32, indices: &[Vec<u32>]) -> HopfBasis {
    let n = indices.len();
    let mut table = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s: Vec<u32> = indices[i].iter().zip(&indices[j]).map(|(a, b)| a + b).collect();
            if s.iter().all(|&e| e < p) {
                table[i][j] = indices.iter().position(|ix| *ix == s);
            }
        }
    }
    let zero = indices.iter().position(|ix| ix.iter().all(|&e| e == 0)).expect("unit index");
    let labels = indices
        .iter()
        .map(|ix| {
            let parts: Vec<String> = ix
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| if e == 1 { format!("X{}", k + 1) } else { format!("X{}^{e}", k + 1) })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        })
        .collect();
    HopfBasis { labels, table, unit: (0..n).map(|i| i == zero).collect(), counit: zero }
}

fn product_hopf(inf: &HopfBasis, et: &HopfBasis) -> HopfBasis {
    let m = et.labels.len();
    let n = inf.labels.len() * m;
    let mut table = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (a, g) = (i / m, i % m);
            let (b, h) = (j / m, j % m);
            if let (Some(c), Some(k)) = (inf.table[a][b], et.table[g][h]) {
                table[i][j] = Some(c * m + k);
            }
        }
    }
    let labels = (0..n).map(|i| format!("{}*{}", inf.labels[i / m], et.labels[i % m])).collect();
    let unit = (0..n).map(|i| inf.unit[i / m] && et.unit[i % m]).collect();
    HopfBasis { labels, table, unit, counit: inf.counit * m + et.counit }
}

fn check_coassociative(h: &HopfAction) -> Result<()> {
    // (Delta (x) 1) mu* = (1 (x) mu*) mu*: D^i D^j / (i! j!) must equal
    // binom(i+j, i) D^{i+j} / (i+j)! when i+j < p, and vanish otherwise
    let alg = &h.alg;
    for b in 0..alg.dim() {
        let e = Element::basis_element(alg, b);
        for ix in &h.indices {
            let inner = h.divided_power(&e, ix);
            for jx in &h.indices {
                let lhs = h.divided_power(&inner, jx);
                let sum: Vec<u32> = ix.iter().zip(jx).map(|(a, b)| a + b).collect();
                let rhs = if sum.iter().all(|&s| s < h.p) {
                    let base = alg.base();
                    let mut binom = base.one();
                    for (a, s) in ix.iter().zip(&sum) {
                        binom = base.mul(&binom, &base.from_i64(binomial(*s, *a) as i64));
                    }
                    h.divided_power(&e, &sum).scale(&binom)
                } else {
                    Element::zero(alg)
                };
                if lhs != rhs {
                    return Err(Error::InvalidAction("coaction is not coassociative".into()));
                }
            }
        }
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
