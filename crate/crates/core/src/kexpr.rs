//! Clique-width expressions: parsing and printing of the S-expression
//! format, evaluation into a labeled graph, and a seeded random generator
//! for test instances.
//!
//! Grammar (whitespace-insensitive, `;` comments to end of line):
//!
//! ```text
//! expr := (v <label> <name>)        create a vertex with the given label
//!       | (u <expr> <expr>)         disjoint union (strictly binary)
//!       | (j <i> <j> <expr>)        join all label-i vertices with label-j
//!       | (r <i> <j> <expr>)        relabel i -> j
//! ```
//!
//! Labels are 1-based. A relabel whose source class is empty at that point is
//! rejected; a join on an empty class is legal and a no-op. Vertex ids of the
//! evaluated graph follow the order of `v` nodes in the text.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{is_connected, Graph, Vertex, WeightedGraph};

#[derive(Debug, Error)]
pub enum KexprError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("duplicate vertex name `{name}` at {line}:{col}")]
    DuplicateName { line: u32, col: u32, name: String },
    #[error("label {label} out of range at {line}:{col}: labels are 1-based")]
    LabelOutOfRange { line: u32, col: u32, label: u64 },
    #[error("join labels must differ, got {label} twice at {line}:{col}")]
    EqualJoinLabels { line: u32, col: u32, label: u32 },
    #[error("relabel labels must differ, got {label} twice at {line}:{col}")]
    EqualRelabLabels { line: u32, col: u32, label: u32 },
    #[error("unnecessary relabel {from}->{to} at {line}:{col}: no vertex carries label {from} there")]
    UnnecessaryRelabel { line: u32, col: u32, from: u32, to: u32 },
    #[error("impossible generator constraints: {0}")]
    ImpossibleConstraints(String),
}

/// One operation of an expression tree. Children are arena indices and always
/// precede their parent in the arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KNode {
    Vert { label: u32, name: String },
    Union { left: usize, right: usize },
    Join { a: u32, b: u32, child: usize },
    Relab { from: u32, to: u32, child: usize },
}

/// A validated clique-width expression.
#[derive(Debug, Clone)]
pub struct KExpression {
    nodes: Vec<KNode>,
    root: usize,
    width: u32,
    n_vertices: usize,
}

/// A graph together with the final label of every vertex.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// Label per vertex, in `1..=width`.
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<(Tok, u32, u32)> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 0u32;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        col += 1;
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            '(' => toks.push((Tok::Open, line, col)),
            ')' => toks.push((Tok::Close, line, col)),
            c if c.is_whitespace() => {}
            c => {
                let start = col;
                let mut atom = String::new();
                atom.push(c);
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    col += 1;
                }
                toks.push((Tok::Atom(atom), line, start));
            }
        }
    }
    toks
}

enum Frame {
    Union { left: Option<usize> },
    Join { a: u32, b: u32 },
    Relab { from: u32, to: u32 },
}

impl KExpression {
    pub fn parse(text: &str) -> Result<KExpression, KexprError> {
        let toks = tokenize(text);
        let mut pos = 0usize;
        let err = |line: u32, col: u32, msg: &str| KexprError::Syntax {
            line,
            col,
            msg: msg.to_string(),
        };
        let last_pos = |toks: &[(Tok, u32, u32)]| {
            toks.last().map(|&(_, l, c)| (l, c)).unwrap_or((1, 1))
        };
        macro_rules! next {
            ($want:expr) => {{
                let t = toks.get(pos).ok_or_else(|| {
                    let (l, c) = last_pos(&toks);
                    err(l, c, concat!("unexpected end of input, expected ", $want))
                })?;
                pos += 1;
                t
            }};
        }

        let mut nodes: Vec<KNode> = Vec::new();
        let mut node_pos: Vec<(u32, u32)> = Vec::new();
        let mut stack: Vec<(Frame, u32, u32)> = Vec::new();
        let mut names: HashMap<String, ()> = HashMap::new();
        let mut done: Option<usize> = None;

        let parse_label = |tok: &(Tok, u32, u32)| -> Result<u32, KexprError> {
            let (t, l, c) = tok;
            match t {
                Tok::Atom(a) => match a.parse::<u64>() {
                    Ok(0) => Err(KexprError::LabelOutOfRange { line: *l, col: *c, label: 0 }),
                    Ok(v) if v <= u32::MAX as u64 => Ok(v as u32),
                    Ok(v) => Err(KexprError::LabelOutOfRange { line: *l, col: *c, label: v }),
                    Err(_) => Err(err(*l, *c, &format!("expected a label, got `{a}`"))),
                },
                _ => Err(err(*l, *c, "expected a label")),
            }
        };

        loop {
            if let Some(idx) = done.take() {
                match stack.last_mut() {
                    None => {
                        if pos != toks.len() {
                            let (_, l, c) = toks[pos];
                            return Err(err(l, c, "trailing input after expression"));
                        }
                        let mut expr = KExpression {
                            nodes,
                            root: idx,
                            width: 0,
                            n_vertices: 0,
                        };
                        expr.validate(&node_pos)?;
                        return Ok(expr);
                    }
                    Some((Frame::Union { left: left @ None }, ..)) => {
                        *left = Some(idx);
                        // fall through to parse the right child
                    }
                    Some(&mut (Frame::Union { left: Some(left) }, line, col)) => {
                        match next!("`)`") {
                            (Tok::Close, ..) => {}
                            (_, l, c) => return Err(err(*l, *c, "expected `)` after union")),
                        }
                        stack.pop();
                        nodes.push(KNode::Union { left, right: idx });
                        node_pos.push((line, col));
                        done = Some(nodes.len() - 1);
                        continue;
                    }
                    Some(&mut (Frame::Join { a, b }, line, col)) => {
                        match next!("`)`") {
                            (Tok::Close, ..) => {}
                            (_, l, c) => return Err(err(*l, *c, "expected `)` after join")),
                        }
                        stack.pop();
                        nodes.push(KNode::Join { a, b, child: idx });
                        node_pos.push((line, col));
                        done = Some(nodes.len() - 1);
                        continue;
                    }
                    Some(&mut (Frame::Relab { from, to }, line, col)) => {
                        match next!("`)`") {
                            (Tok::Close, ..) => {}
                            (_, l, c) => return Err(err(*l, *c, "expected `)` after relabel")),
                        }
                        stack.pop();
                        nodes.push(KNode::Relab { from, to, child: idx });
                        node_pos.push((line, col));
                        done = Some(nodes.len() - 1);
                        continue;
                    }
                }
            }

            let (open_l, open_c) = match next!("`(`") {
                (Tok::Open, l, c) => (*l, *c),
                (_, l, c) => return Err(err(*l, *c, "expected `(`")),
            };
            let kw = match next!("an operation keyword") {
                (Tok::Atom(a), ..) => a.clone(),
                (_, l, c) => return Err(err(*l, *c, "expected an operation keyword")),
            };
            match kw.as_str() {
                "v" => {
                    let label = parse_label(next!("a label"))?;
                    let (name, nl, nc) = match next!("a vertex name") {
                        (Tok::Atom(a), l, c) => (a.clone(), *l, *c),
                        (_, l, c) => return Err(err(*l, *c, "expected a vertex name")),
                    };
                    match next!("`)`") {
                        (Tok::Close, ..) => {}
                        (_, l, c) => return Err(err(*l, *c, "expected `)` after vertex")),
                    }
                    if names.insert(name.clone(), ()).is_some() {
                        return Err(KexprError::DuplicateName { line: nl, col: nc, name });
                    }
                    nodes.push(KNode::Vert { label, name });
                    node_pos.push((open_l, open_c));
                    done = Some(nodes.len() - 1);
                }
                "u" => stack.push((Frame::Union { left: None }, open_l, open_c)),
                "j" => {
                    let a = parse_label(next!("a label"))?;
                    let b = parse_label(next!("a label"))?;
                    if a == b {
                        return Err(KexprError::EqualJoinLabels { line: open_l, col: open_c, label: a });
                    }
                    stack.push((Frame::Join { a, b }, open_l, open_c));
                }
                "r" => {
                    let from = parse_label(next!("a label"))?;
                    let to = parse_label(next!("a label"))?;
                    if from == to {
                        return Err(KexprError::EqualRelabLabels { line: open_l, col: open_c, label: from });
                    }
                    stack.push((Frame::Relab { from, to }, open_l, open_c));
                }
                other => {
                    return Err(err(open_l, open_c, &format!("unknown operation `{other}`")));
                }
            }
        }
    }

    /// Computes width and vertex count and rejects relabels of empty classes.
    /// Children precede parents in the arena, so one forward scan suffices.
    fn validate(&mut self, node_pos: &[(u32, u32)]) -> Result<(), KexprError> {
        let mut width = 0u32;
        let mut n = 0usize;
        let mut present: Vec<HashSet<u32>> = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            let set = match node {
                KNode::Vert { label, .. } => {
                    width = width.max(*label);
                    n += 1;
                    HashSet::from([*label])
                }
                KNode::Union { left, right } => {
                    let a = std::mem::take(&mut present[*left]);
                    let b = std::mem::take(&mut present[*right]);
                    let (mut a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                    a.extend(b);
                    a
                }
                KNode::Join { a, b, child } => {
                    width = width.max(*a).max(*b);
                    std::mem::take(&mut present[*child])
                }
                KNode::Relab { from, to, child } => {
                    width = width.max(*from).max(*to);
                    let mut s = std::mem::take(&mut present[*child]);
                    if !s.remove(from) {
                        let (line, col) = node_pos.get(idx).copied().unwrap_or((0, 0));
                        return Err(KexprError::UnnecessaryRelabel {
                            line,
                            col,
                            from: *from,
                            to: *to,
                        });
                    }
                    s.insert(*to);
                    s
                }
            };
            present.push(set);
        }
        self.width = width;
        self.n_vertices = n;
        Ok(())
    }

    /// Width: the largest label mentioned by any operation.
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Size: the number of operations (nodes of the stored tree).
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn nodes(&self) -> &[KNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Evaluates the expression: vertices in `v`-node text order, joins adding
    /// only absent edges.
    pub fn evaluate(&self) -> LabeledGraph {
        // class map per node: label -> vertex list, merged small-to-large
        let mut state: Vec<Option<HashMap<u32, Vec<Vertex>>>> = vec![None; self.nodes.len()];
        let mut edges: HashSet<(Vertex, Vertex)> = HashSet::new();
        let mut names: Vec<String> = Vec::new();
        for (idx, node) in self.nodes.iter().enumerate() {
            let classes = match node {
                KNode::Vert { label, name } => {
                    let v = names.len() as Vertex;
                    names.push(name.clone());
                    HashMap::from([(*label, vec![v])])
                }
                KNode::Union { left, right } => {
                    let a = state[*left].take().expect("child evaluated once");
                    let b = state[*right].take().expect("child evaluated once");
                    let (mut a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                    for (label, mut vs) in b {
                        a.entry(label).or_default().append(&mut vs);
                    }
                    a
                }
                KNode::Join { a, b, child } => {
                    let classes = state[*child].take().expect("child evaluated once");
                    if let (Some(ca), Some(cb)) = (classes.get(a), classes.get(b)) {
                        for &u in ca {
                            for &v in cb {
                                edges.insert((u.min(v), u.max(v)));
                            }
                        }
                    }
                    classes
                }
                KNode::Relab { from, to, child } => {
                    let mut classes = state[*child].take().expect("child evaluated once");
                    let vs = classes.remove(from).expect("validated: class nonempty");
                    classes.entry(*to).or_default().extend(vs);
                    classes
                }
            };
            state[idx] = Some(classes);
        }
        let final_classes = state[self.root].take().expect("root state");
        let n = names.len();
        let mut labels = vec![0u32; n];
        for (label, vs) in final_classes {
            for v in vs {
                labels[v as usize] = label;
            }
        }
        let mut edge_list: Vec<(Vertex, Vertex)> = edges.into_iter().collect();
        edge_list.sort_unstable();
        let graph = Graph::from_edges(n, &edge_list)
            .expect("evaluation produces a simple graph")
            .with_names(names);
        LabeledGraph { graph, labels }
    }

    /// Canonical text form; `parse(to_text(e))` reproduces the tree.
    pub fn to_text(&self) -> String {
        enum T {
            N(usize),
            S(&'static str),
        }
        let mut out = String::new();
        let mut stack = vec![T::N(self.root)];
        while let Some(t) = stack.pop() {
            match t {
                T::S(s) => out.push_str(s),
                T::N(i) => match &self.nodes[i] {
                    KNode::Vert { label, name } => {
                        out.push_str(&format!("(v {label} {name})"));
                    }
                    KNode::Union { left, right } => {
                        out.push_str("(u ");
                        stack.push(T::S(")"));
                        stack.push(T::N(*right));
                        stack.push(T::S(" "));
                        stack.push(T::N(*left));
                    }
                    KNode::Join { a, b, child } => {
                        out.push_str(&format!("(j {a} {b} "));
                        stack.push(T::S(")"));
                        stack.push(T::N(*child));
                    }
                    KNode::Relab { from, to, child } => {
                        out.push_str(&format!("(r {from} {to} "));
                        stack.push(T::S(")"));
                        stack.push(T::N(*child));
                    }
                },
            }
        }
        out
    }
}

impl std::fmt::Display for KExpression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Builder used by the random generator; keeps per-subexpression class sizes
/// so joins can be chosen with bounded cost.
struct GenBuilder {
    nodes: Vec<KNode>,
    k: u32,
    next_vertex: usize,
}

/// A subexpression under construction: arena root and class sizes by label.
struct Sub {
    root: usize,
    sizes: HashMap<u32, usize>,
}

impl GenBuilder {
    fn vert(&mut self, rng: &mut ChaCha8Rng) -> Sub {
        let label = rng.gen_range(1..=self.k);
        let name = format!("v{}", self.next_vertex);
        self.next_vertex += 1;
        self.nodes.push(KNode::Vert { label, name });
        Sub { root: self.nodes.len() - 1, sizes: HashMap::from([(label, 1)]) }
    }

    fn relab(&mut self, mut sub: Sub, from: u32, to: u32) -> Sub {
        debug_assert!(from != to);
        let moved = sub.sizes.remove(&from).expect("relabel of a present class");
        *sub.sizes.entry(to).or_insert(0) += moved;
        self.nodes.push(KNode::Relab { from, to, child: sub.root });
        sub.root = self.nodes.len() - 1;
        sub
    }

    fn join(&mut self, mut sub: Sub, a: u32, b: u32) -> Sub {
        debug_assert!(a != b);
        self.nodes.push(KNode::Join { a, b, child: sub.root });
        sub.root = self.nodes.len() - 1;
        sub
    }

    /// Collapses every class of `sub` into `target`.
    fn collapse_to(&mut self, mut sub: Sub, target: u32) -> Sub {
        let labels: Vec<u32> = {
            let mut l: Vec<u32> = sub.sizes.keys().copied().filter(|&l| l != target).collect();
            l.sort_unstable();
            l
        };
        for l in labels {
            sub = self.relab(sub, l, target);
        }
        sub
    }

    /// Union of two subexpressions plus, usually, a join that connects them.
    fn merge(&mut self, rng: &mut ChaCha8Rng, left: Sub, right: Sub, connect: bool) -> Sub {
        // When both sides live in one identical class a pre-relabel frees a
        // label to join against.
        let mut right = right;
        let join_pair = if connect {
            let pair = best_join_pair(&left.sizes, &right.sizes);
            match pair {
                Some(p) => Some(p),
                None => {
                    let x = *right.sizes.keys().next().unwrap();
                    let y = (1..=self.k).find(|&l| l != x).expect("k >= 2 for n > 1");
                    right = self.relab(right, x, y);
                    Some((*left.sizes.keys().next().unwrap(), y))
                }
            }
        } else {
            None
        };
        let mut sizes = left.sizes;
        for (l, s) in right.sizes {
            *sizes.entry(l).or_insert(0) += s;
        }
        self.nodes.push(KNode::Union { left: left.root, right: right.root });
        let mut sub = Sub { root: self.nodes.len() - 1, sizes };
        if let Some((i, j)) = join_pair {
            sub = self.join(sub, i, j);
        }
        // a couple of random extra operations, with join cost capped
        for _ in 0..rng.gen_range(0..=2u32) {
            if rng.gen_bool(0.5) && self.k >= 2 {
                let labels: Vec<u32> = sorted_keys(&sub.sizes);
                let mut cands = Vec::new();
                for &i in &labels {
                    for &j in &labels {
                        if i < j && sub.sizes[&i] * sub.sizes[&j] <= 256 {
                            cands.push((i, j));
                        }
                    }
                }
                if !cands.is_empty() {
                    let (i, j) = cands[rng.gen_range(0..cands.len())];
                    sub = self.join(sub, i, j);
                }
            } else if self.k >= 2 {
                let labels = sorted_keys(&sub.sizes);
                let from = labels[rng.gen_range(0..labels.len())];
                let to = (1..=self.k).filter(|&l| l != from).nth(rng.gen_range(0..self.k as usize - 1));
                if let Some(to) = to {
                    sub = self.relab(sub, from, to);
                }
            }
        }
        sub
    }

    /// Balanced random subexpression on `n` vertices.
    fn gen_balanced(&mut self, rng: &mut ChaCha8Rng, n: usize, connect: bool) -> Sub {
        if n == 1 {
            return self.vert(rng);
        }
        let lo = (n / 4).max(1);
        let hi = (3 * n / 4).max(1).min(n - 1);
        let n1 = rng.gen_range(lo..=hi);
        let left = self.gen_balanced(rng, n1, connect);
        let right = self.gen_balanced(rng, n - n1, connect);
        let do_connect = connect || rng.gen_bool(0.7);
        self.merge(rng, left, right, do_connect)
    }
}

fn sorted_keys(sizes: &HashMap<u32, usize>) -> Vec<u32> {
    let mut v: Vec<u32> = sizes.keys().copied().collect();
    v.sort_unstable();
    v
}

/// The pair (i, j) with i in the left classes, j in the right, i != j,
/// minimizing the size of the resulting join.
fn best_join_pair(
    left: &HashMap<u32, usize>,
    right: &HashMap<u32, usize>,
) -> Option<(u32, u32)> {
    let mut best: Option<((u32, u32), usize)> = None;
    for (&i, &si) in left {
        for (&j, &sj) in right {
            if i == j {
                continue;
            }
            let li = si + right.get(&i).copied().unwrap_or(0);
            let lj = sj + left.get(&j).copied().unwrap_or(0);
            let cost = li * lj;
            let better = match best {
                None => true,
                Some((p, c)) => cost < c || (cost == c && (i, j) < p),
            };
            if better {
                best = Some(((i, j), cost));
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Deterministic random expression on `n` vertices of width at most `k`.
///
/// The generator always produces a valid expression; with `require_connected`
/// it forces a connecting join at every union and re-checks the evaluation.
/// Large instances are built as a chain of bounded blocks so the edge count
/// stays linear in `n`.
pub fn random_kexpression(
    n: usize,
    k: u32,
    seed: u64,
    require_connected: bool,
) -> Result<KExpression, KexprError> {
    if n == 0 {
        return Err(KexprError::ImpossibleConstraints("n must be at least 1".into()));
    }
    if k == 0 {
        return Err(KexprError::ImpossibleConstraints("k must be at least 1".into()));
    }
    if n > 1 && k < 2 {
        return Err(KexprError::ImpossibleConstraints(
            "n > 1 needs k >= 2: a join requires two labels".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..200 {
        let expr = generate_once(n, k, &mut rng, require_connected);
        if !require_connected || is_connected(&WeightedGraph::unit_from(&expr.evaluate().graph)) {
            return Ok(expr);
        }
    }
    Err(KexprError::ImpossibleConstraints(
        "could not generate a connected instance".into(),
    ))
}

fn generate_once(n: usize, k: u32, rng: &mut ChaCha8Rng, connect: bool) -> KExpression {
    let block_cap = if k >= 3 && n > 4096 { 32 } else { 128 };
    let mut b = GenBuilder { nodes: Vec::new(), k, next_vertex: 0 };
    let sub = if n <= block_cap || k < 3 {
        b.gen_balanced(rng, n, connect)
    } else {
        // chain of blocks: each new block is collapsed to a scratch label,
        // joined to the previous block, and becomes the next port
        let mut left = n;
        let first = rng.gen_range(block_cap / 2..=block_cap).min(left);
        left -= first;
        let mut acc = b.gen_balanced(rng, first, connect);
        acc = b.collapse_to(acc, 2);
        while left > 0 {
            let size = rng.gen_range(block_cap / 2..=block_cap).min(left);
            left -= size;
            let block = b.gen_balanced(rng, size, connect);
            let block = b.collapse_to(block, 3);
            b.nodes.push(KNode::Union { left: acc.root, right: block.root });
            let mut sizes = acc.sizes;
            for (l, s) in block.sizes {
                *sizes.entry(l).or_insert(0) += s;
            }
            acc = Sub { root: b.nodes.len() - 1, sizes };
            if connect || rng.gen_bool(0.7) {
                acc = b.join(acc, 2, 3);
            }
            acc = b.relab(acc, 2, 1);
            acc = b.relab(acc, 3, 2);
        }
        acc
    };
    let root = sub.root;
    let mut expr = KExpression { nodes: b.nodes, root, width: 0, n_vertices: 0 };
    let dummy_pos = vec![(0u32, 0u32); expr.nodes.len()];
    expr.validate(&dummy_pos).expect("generator builds valid expressions");
    debug_assert!(expr.width <= k);
    debug_assert_eq!(expr.n_vertices, n);
    expr
}
