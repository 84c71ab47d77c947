//! Lexicographically smallest solutions of quadratic systems over F₂.
//!
//! Each equation reads `c + Σ x_i + Σ x_j x_k = 0`. Solving runs in two
//! stages: cheap rewriting (fixed variables, equalities `x = y + c`, forced
//! products) shrinks the system, which then splits into blocks of variables
//! that never share an equation. Blocks are solved separately by a
//! depth-first search that tries 0 before 1 and propagates every equation
//! that becomes linear in a single unknown.
//!
//! Returning the lexicographically smallest solution of every block yields
//! the lexicographically smallest solution overall, and class representatives
//! are the smallest member of their class, so the rewriting keeps the order.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Equation {
    pub constant: bool,
    pub linear: Vec<usize>,
    pub quadratic: Vec<(usize, usize)>,
}

impl Equation {
    pub fn new(constant: bool) -> Self {
        Equation {
            constant,
            ..Default::default()
        }
    }

    /// Reduces `x*x` to `x` and cancels repeated terms in pairs.
    fn normalize(&mut self) {
        let mut linear = std::mem::take(&mut self.linear);
        let mut quadratic = Vec::with_capacity(self.quadratic.len());
        for &(x, y) in &self.quadratic {
            if x == y {
                linear.push(x);
            } else {
                quadratic.push((x.min(y), x.max(y)));
            }
        }
        self.linear = cancel_pairs(linear);
        self.quadratic = cancel_pairs(quadratic);
    }

    fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.linear
            .iter()
            .copied()
            .chain(self.quadratic.iter().flat_map(|&(x, y)| [x, y]))
    }

    fn is_trivial(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty()
    }
}

fn cancel_pairs<T: Ord + Copy>(mut items: Vec<T>) -> Vec<T> {
    items.sort_unstable();
    let mut out = Vec::with_capacity(items.len());
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j] == items[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(items[i]);
        }
        i = j;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    Solution(Vec<bool>),
    Infeasible,
    /// Some independent block still had more free variables than allowed.
    TooLarge { block: usize },
}

/// Value of a variable after rewriting: a constant, or `rep + parity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Binding {
    Const(bool),
    Var(usize, bool),
}

struct Rewriter {
    parent: Vec<usize>,
    parity: Vec<bool>,
    fixed: Vec<Option<bool>>,
}

impl Rewriter {
    fn new(n: usize) -> Self {
        Rewriter {
            parent: (0..n).collect(),
            parity: vec![false; n],
            fixed: vec![None; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, par) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= par;
        (root, self.parity[x])
    }

    fn binding(&mut self, x: usize) -> Binding {
        let (root, par) = self.find(x);
        match self.fixed[root] {
            Some(v) => Binding::Const(v ^ par),
            None => Binding::Var(root, par),
        }
    }

    /// Records `x = value`; false on contradiction.
    fn fix(&mut self, x: usize, value: bool) -> bool {
        match self.binding(x) {
            Binding::Const(v) => v == value,
            Binding::Var(root, par) => {
                self.fixed[root] = Some(value ^ par);
                true
            }
        }
    }

    /// Records `x + y = c`; false on contradiction.
    fn join(&mut self, x: usize, y: usize, c: bool) -> bool {
        match (self.binding(x), self.binding(y)) {
            (Binding::Const(u), Binding::Const(v)) => u ^ v == c,
            (Binding::Const(u), Binding::Var(..)) => self.fix(y, u ^ c),
            (Binding::Var(..), Binding::Const(v)) => self.fix(x, v ^ c),
            (Binding::Var(rx, px), Binding::Var(ry, py)) => {
                if rx == ry {
                    return px ^ py == c;
                }
                // Smallest index stays the representative.
                let (keep, drop) = if rx < ry { (rx, ry) } else { (ry, rx) };
                self.parent[drop] = keep;
                self.parity[drop] = px ^ py ^ c;
                true
            }
        }
    }

    fn rewrite(&mut self, eq: &Equation) -> Equation {
        let mut out = Equation::new(eq.constant);
        for &x in &eq.linear {
            match self.binding(x) {
                Binding::Const(v) => out.constant ^= v,
                Binding::Var(r, p) => {
                    out.linear.push(r);
                    out.constant ^= p;
                }
            }
        }
        for &(x, y) in &eq.quadratic {
            match (self.binding(x), self.binding(y)) {
                (Binding::Const(u), Binding::Const(v)) => out.constant ^= u & v,
                (Binding::Const(u), Binding::Var(r, p)) | (Binding::Var(r, p), Binding::Const(u)) => {
                    if u {
                        out.linear.push(r);
                        out.constant ^= p;
                    }
                }
                (Binding::Var(r1, p1), Binding::Var(r2, p2)) => {
                    // (r1 + p1)(r2 + p2) = r1 r2 + p2 r1 + p1 r2 + p1 p2
                    out.quadratic.push((r1, r2));
                    if p2 {
                        out.linear.push(r1);
                    }
                    if p1 {
                        out.linear.push(r2);
                    }
                    out.constant ^= p1 & p2;
                }
            }
        }
        out.normalize();
        out
    }
}

pub(crate) const LARGE_BLOCK_BUDGET: u64 = 1 << 16;

/// Finds the lexicographically smallest solution (variable 0 most
/// significant, false < true) of `equations` over `num_vars` unknowns.
///
/// Each independent block of at most `max_block` unknowns is searched with a
/// budget of `2^(max_block + 1)` decisions, enough to exhaust it. Larger
/// blocks get a short attempt of [`LARGE_BLOCK_BUDGET`] decisions and are
/// reported as too large if that does not decide them.
pub(crate) fn solve_lex_min(num_vars: usize, equations: &[Equation], max_block: usize) -> Outcome {
    let full_budget = 1u64 << (max_block.min(40) + 1);
    let mut rw = Rewriter::new(num_vars);
    let mut system: Vec<Equation> = equations
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.normalize();
            e
        })
        .collect();

    loop {
        let mut changed = false;
        let mut next = Vec::with_capacity(system.len());
        for eq in &system {
            let eq = rw.rewrite(eq);
            if eq.is_trivial() {
                if eq.constant {
                    return Outcome::Infeasible;
                }
                continue;
            }
            let ok = match (eq.linear.as_slice(), eq.quadratic.as_slice()) {
                ([x], []) => {
                    changed = true;
                    rw.fix(*x, eq.constant)
                }
                ([x, y], []) => {
                    changed = true;
                    rw.join(*x, *y, eq.constant)
                }
                ([], [(x, y)]) if eq.constant => {
                    changed = true;
                    rw.fix(*x, true) && rw.fix(*y, true)
                }
                _ => {
                    next.push(eq);
                    true
                }
            };
            if !ok {
                return Outcome::Infeasible;
            }
        }
        system = next;
        if !changed {
            break;
        }
    }

    // Split the remaining free representatives into independent blocks.
    let mut block_of: Vec<usize> = (0..num_vars).collect();
    fn root(b: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while b[r] != r {
            r = b[r];
        }
        let mut y = x;
        while b[y] != r {
            let next = b[y];
            b[y] = r;
            y = next;
        }
        r
    }
    for eq in &system {
        let vars: Vec<usize> = eq.variables().collect();
        for w in vars.windows(2) {
            let (a, b) = (root(&mut block_of, w[0]), root(&mut block_of, w[1]));
            if a != b {
                block_of[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for (k, eq) in system.iter().enumerate() {
        let first = eq.variables().next().expect("nontrivial equation");
        let r = root(&mut block_of, first);
        blocks.entry(r).or_default().1.push(k);
    }
    for (vars, eqs) in blocks.values_mut() {
        *vars = eqs.iter().flat_map(|&k| system[k].variables()).collect();
        vars.sort_unstable();
        vars.dedup();
    }
    let mut rep_value = vec![false; num_vars];
    let mut undecided: Option<usize> = None;
    for (vars, eqs) in blocks.values() {
        let local: Vec<LocalEquation> = eqs
            .iter()
            .map(|&k| LocalEquation::new(&system[k], vars))
            .collect();
        let budget = if vars.len() <= max_block {
            full_budget
        } else {
            LARGE_BLOCK_BUDGET.min(full_budget)
        };
        match search_block(vars.len(), &local, budget) {
            Search::Found(values) => {
                for (v, val) in vars.iter().zip(values) {
                    rep_value[*v] = val;
                }
            }
            Search::Refuted => return Outcome::Infeasible,
            Search::OutOfBudget => {
                undecided = Some(undecided.unwrap_or(0).max(vars.len()));
            }
        }
    }
    if let Some(block) = undecided {
        return Outcome::TooLarge { block };
    }

    let solution = (0..num_vars)
        .map(|x| match rw.binding(x) {
            Binding::Const(v) => v,
            Binding::Var(r, p) => rep_value[r] ^ p,
        })
        .collect();
    Outcome::Solution(solution)
}

struct LocalEquation {
    constant: bool,
    linear: Vec<usize>,
    quadratic: Vec<(usize, usize)>,
}

impl LocalEquation {
    fn new(eq: &Equation, vars: &[usize]) -> Self {
        let idx = |v: usize| vars.binary_search(&v).expect("variable in block");
        LocalEquation {
            constant: eq.constant,
            linear: eq.linear.iter().map(|&v| idx(v)).collect(),
            quadratic: eq.quadratic.iter().map(|&(x, y)| (idx(x), idx(y))).collect(),
        }
    }

    /// Residual under a partial assignment: the constant part, the unknowns
    /// left in linear position (in `scratch`, repeated pairs cancelled), and
    /// whether an unknown-unknown product remains.
    fn residual(&self, assign: &[Option<bool>], scratch: &mut Vec<usize>) -> (bool, bool) {
        scratch.clear();
        let mut c = self.constant;
        let mut nonlinear = false;
        for &x in &self.linear {
            match assign[x] {
                Some(v) => c ^= v,
                None => scratch.push(x),
            }
        }
        for &(x, y) in &self.quadratic {
            match (assign[x], assign[y]) {
                (Some(u), Some(v)) => c ^= u & v,
                (Some(true), None) => scratch.push(y),
                (None, Some(true)) => scratch.push(x),
                (None, None) => nonlinear = true,
                _ => {}
            }
        }
        if !nonlinear && scratch.len() > 1 {
            *scratch = cancel_pairs(std::mem::take(scratch));
        }
        (c, nonlinear)
    }
}

enum Linear {
    Conflict,
    Open,
    Solved,
}

enum Search {
    Found(Vec<bool>),
    Refuted,
    OutOfBudget,
}

struct BlockSearch<'a> {
    eqs: &'a [LocalEquation],
    touching: Vec<Vec<usize>>,
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
    scratch: Vec<usize>,
    budget: u64,
}

fn search_block(n: usize, eqs: &[LocalEquation], budget: u64) -> Search {
    let mut touching = vec![Vec::new(); n];
    for (k, eq) in eqs.iter().enumerate() {
        for &x in eq.linear.iter().chain(eq.quadratic.iter().flat_map(|(x, y)| [x, y])) {
            if touching[x].last() != Some(&k) {
                touching[x].push(k);
            }
        }
    }
    let mut search = BlockSearch {
        eqs,
        touching,
        assign: vec![None; n],
        trail: Vec::with_capacity(n),
        scratch: Vec::new(),
        budget,
    };
    match search.dfs(0) {
        Some(true) => Search::Found(search.assign.into_iter().map(|v| v.unwrap_or(false)).collect()),
        Some(false) => Search::Refuted,
        None => Search::OutOfBudget,
    }
}

impl BlockSearch<'_> {
    /// Assigns `x = value` and everything it forces; false on conflict. All
    /// assignments are pushed on the trail so the caller can undo them.
    fn assign_and_propagate(&mut self, x: usize, value: bool) -> bool {
        let mut queue = vec![(x, value)];
        while let Some((x, value)) = queue.pop() {
            match self.assign[x] {
                Some(v) if v == value => continue,
                Some(_) => return false,
                None => {}
            }
            self.assign[x] = Some(value);
            self.trail.push(x);
            for &k in &self.touching[x] {
                let (c, nonlinear) = self.eqs[k].residual(&self.assign, &mut self.scratch);
                if nonlinear {
                    continue;
                }
                match self.scratch.as_slice() {
                    [] if c => return false,
                    [y] => queue.push((*y, c)),
                    _ => {}
                }
            }
        }
        true
    }

    /// `Some(found)` once decided, `None` if the budget ran out.
    /// Gaussian elimination over the equations that are linear under the
    /// current assignment. Detects inconsistency early, and when nothing
    /// nonlinear is left it assigns the lexicographically smallest
    /// completion directly.
    fn linear_status(&mut self) -> Linear {
        let n = self.assign.len();
        let words = n.div_ceil(64);
        let mut rows: Vec<(Vec<u64>, bool)> = Vec::new();
        let mut all_linear = true;
        for eq in self.eqs {
            let (c, nonlinear) = eq.residual(&self.assign, &mut self.scratch);
            if nonlinear {
                all_linear = false;
                continue;
            }
            let mut bits = vec![0u64; words];
            for &x in &self.scratch {
                bits[x / 64] ^= 1 << (x % 64);
            }
            rows.push((bits, c));
        }
        // Pivot on the highest unknown first so that free unknowns, which
        // are set to 0, come before the pivots they determine.
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut used = vec![false; rows.len()];
        for col in (0..n).rev() {
            if self.assign[col].is_some() {
                continue;
            }
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r].0[w] & bit != 0) else {
                continue;
            };
            used[r] = true;
            let pivot = rows[r].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k != r && row.0[w] & bit != 0 {
                    for (a, b) in row.0.iter_mut().zip(&pivot.0) {
                        *a ^= b;
                    }
                    row.1 ^= pivot.1;
                }
            }
            pivots.push((col, r));
        }
        let inconsistent = rows
            .iter()
            .zip(&used)
            .any(|((bits, c), u)| !u && *c && bits.iter().all(|&b| b == 0));
        if inconsistent {
            return Linear::Conflict;
        }
        if !all_linear {
            return Linear::Open;
        }
        for x in 0..n {
            if self.assign[x].is_none() {
                self.assign[x] = Some(false);
                self.trail.push(x);
            }
        }
        for (col, r) in pivots {
            self.assign[col] = Some(rows[r].1);
        }
        Linear::Solved
    }

    fn dfs(&mut self, start: usize) -> Option<bool> {
        match self.linear_status() {
            Linear::Conflict => return Some(false),
            Linear::Solved => return Some(true),
            Linear::Open => {}
        }
        let Some(x) = (start..self.assign.len()).find(|&x| self.assign[x].is_none()) else {
            return Some(true);
        };
        for value in [false, true] {
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            let mark = self.trail.len();
            if self.assign_and_propagate(x, value) && self.dfs(x + 1)? {
                return Some(true);
            }
            for y in self.trail.drain(mark..) {
                self.assign[y] = None;
            }
        }
        Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn holds(eq: &Equation, x: &[bool]) -> bool {
        let mut v = eq.constant;
        for &i in &eq.linear {
            v ^= x[i];
        }
        for &(i, j) in &eq.quadratic {
            v ^= x[i] & x[j];
        }
        !v
    }

    fn brute_force(n: usize, eqs: &[Equation]) -> Option<Vec<bool>> {
        // Variable 0 is the most significant bit, so counting up is lex order.
        (0u32..1 << n)
            .map(|bits| (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect::<Vec<_>>())
            .find(|x| eqs.iter().all(|e| holds(e, x)))
    }

    fn eq(constant: bool, linear: &[usize], quadratic: &[(usize, usize)]) -> Equation {
        Equation {
            constant,
            linear: linear.to_vec(),
            quadratic: quadratic.to_vec(),
        }
    }

    #[test]
    fn product_equal_to_one_forces_both() {
        let out = solve_lex_min(3, &[eq(true, &[], &[(0, 2)])], 24);
        assert_eq!(out, Outcome::Solution(vec![true, false, true]));
    }

    #[test]
    fn contradiction_is_infeasible() {
        let eqs = [eq(false, &[0, 1], &[]), eq(true, &[0, 1], &[])];
        assert_eq!(solve_lex_min(2, &eqs, 24), Outcome::Infeasible);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // Dense random products over 14 unknowns, one block; deterministic.
        let mut state = 0x2545_f491_u64;
        let mut next = move |m: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize % m
        };
        let n = 14;
        let eqs: Vec<_> = (0..20)
            .map(|_| Equation {
                constant: next(2) == 1,
                linear: (0..3).map(|_| next(n)).collect(),
                quadratic: (0..4).map(|_| (next(n), next(n))).collect(),
            })
            .collect();
        assert!(matches!(solve_lex_min(n, &eqs, 2), Outcome::TooLarge { .. }));
        match solve_lex_min(n, &eqs, 24) {
            Outcome::Solution(x) => assert_eq!(Some(x), brute_force(n, &eqs)),
            Outcome::Infeasible => assert_eq!(None, brute_force(n, &eqs)),
            Outcome::TooLarge { .. } => panic!("within budget"),
        }
    }

    fn arb_equation(n: usize) -> impl Strategy<Value = Equation> {
        (
            any::<bool>(),
            prop::collection::vec(0..n, 0..4),
            prop::collection::vec((0..n, 0..n), 0..4),
        )
            .prop_map(|(constant, linear, quadratic)| Equation {
                constant,
                linear,
                quadratic,
            })
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..9, eqs in prop::collection::vec(arb_equation(8), 0..10)) {
            let eqs: Vec<Equation> = eqs
                .into_iter()
                .map(|mut e| {
                    e.linear.retain(|&x| x < n);
                    e.quadratic.retain(|&(x, y)| x < n && y < n);
                    e
                })
                .collect();
            let expected = brute_force(n, &eqs);
            match solve_lex_min(n, &eqs, 24) {
                Outcome::Solution(x) => prop_assert_eq!(Some(x), expected),
                Outcome::Infeasible => prop_assert_eq!(None, expected),
                Outcome::TooLarge { .. } => prop_assert!(false, "cap not reachable"),
            }
        }
    }
}
