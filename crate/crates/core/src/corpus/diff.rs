//! Ordered tree edit distance (Zhang and Shasha) with edit-script
//! recovery, over node labels with unit insert/delete/relabel costs.

use std::collections::BTreeSet;

use crate::minilang::{NodeId, Program};

/// A program flattened in post-order under a virtual root. Index 0 is
/// unused so the recurrences can use `i - 1` freely.
struct Flat {
    labels: Vec<String>,
    /// Leftmost leaf descendant, post-order index.
    lml: Vec<usize>,
    /// Post-order index to program node; `None` for the virtual root.
    node: Vec<Option<NodeId>>,
    keyroots: Vec<usize>,
}

impl Flat {
    fn new(p: &Program) -> Flat {
        let mut f = Flat { labels: vec![String::new()], lml: vec![0], node: vec![None], keyroots: Vec::new() };
        let roots: Vec<NodeId> = p.functions().collect();
        let root = f.visit(p, None, &roots);
        debug_assert_eq!(root, f.len());
        let mut seen = BTreeSet::new();
        for i in (1..=f.len()).rev() {
            if seen.insert(f.lml[i]) {
                f.keyroots.push(i);
            }
        }
        f.keyroots.sort_unstable();
        f
    }

    fn visit(&mut self, p: &Program, id: Option<NodeId>, children: &[NodeId]) -> usize {
        let kids: Vec<usize> = children.iter().map(|&c| self.visit(p, Some(c), p.children(c))).collect();
        self.labels.push(id.map_or_else(|| "<root>".to_string(), |n| p.kind(n).label()));
        self.node.push(id);
        let me = self.labels.len() - 1;
        self.lml.push(kids.first().map_or(me, |&k| self.lml[k]));
        me
    }

    fn len(&self) -> usize {
        self.labels.len() - 1
    }
}

struct Zs<'a> {
    a: &'a Flat,
    b: &'a Flat,
    td: Vec<Vec<usize>>,
}

impl Zs<'_> {
    fn relabel(&self, x: usize, y: usize) -> usize {
        usize::from(self.a.labels[x] != self.b.labels[y])
    }

    /// Forest distances for the key-root pair (i, j), offset so that row
    /// and column 0 stand for the empty forest. Fills `td` as a side effect.
    fn forest(&mut self, i: usize, j: usize) -> Vec<Vec<usize>> {
        let (li, lj) = (self.a.lml[i], self.b.lml[j]);
        let (rows, cols) = (i - li + 2, j - lj + 2);
        let mut fd = vec![vec![0usize; cols]; rows];
        for x in 1..rows {
            fd[x][0] = fd[x - 1][0] + 1;
        }
        for y in 1..cols {
            fd[0][y] = fd[0][y - 1] + 1;
        }
        for x in li..=i {
            for y in lj..=j {
                let (fx, fy) = (x - li + 1, y - lj + 1);
                let del = fd[fx - 1][fy] + 1;
                let ins = fd[fx][fy - 1] + 1;
                if self.a.lml[x] == li && self.b.lml[y] == lj {
                    let v = del.min(ins).min(fd[fx - 1][fy - 1] + self.relabel(x, y));
                    fd[fx][fy] = v;
                    self.td[x][y] = v;
                } else {
                    let (px, py) = (self.a.lml[x] - li, self.b.lml[y] - lj);
                    fd[fx][fy] = del.min(ins).min(fd[px][py] + self.td[x][y]);
                }
            }
        }
        fd
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditScript {
    pub distance: usize,
    /// Matched (original, improved) pairs; labels may differ.
    pub matched: Vec<(NodeId, NodeId)>,
    pub deleted: Vec<NodeId>,
    pub inserted: Vec<NodeId>,
}

/// Minimum-cost edit script turning `a` into `b`.
pub fn tree_edit(a: &Program, b: &Program) -> EditScript {
    let (fa, fb) = (Flat::new(a), Flat::new(b));
    let (n, m) = (fa.len(), fb.len());
    let mut zs = Zs { a: &fa, b: &fb, td: vec![vec![0; m + 1]; n + 1] };
    for &i in &fa.keyroots {
        for &j in &fb.keyroots {
            zs.forest(i, j);
        }
    }
    let mut script = EditScript { distance: zs.td[n][m], ..EditScript::default() };
    let mut pairs_a = vec![None; n + 1];
    let mut deleted = Vec::new();
    let mut inserted = Vec::new();
    let mut stack = vec![(n, m)];
    while let Some((i, j)) = stack.pop() {
        let fd = zs.forest(i, j);
        let (li, lj) = (fa.lml[i], fb.lml[j]);
        let (mut x, mut y) = (i, j);
        while x + 1 > li || y + 1 > lj {
            let (fx, fy) = (x + 1 - li, y + 1 - lj);
            if fx > 0 && fd[fx][fy] == fd[fx - 1][fy] + 1 {
                deleted.push(x);
                x -= 1;
            } else if fy > 0 && fd[fx][fy] == fd[fx][fy - 1] + 1 {
                inserted.push(y);
                y -= 1;
            } else if fa.lml[x] == li && fb.lml[y] == lj {
                pairs_a[x] = Some(y);
                x -= 1;
                y -= 1;
            } else {
                stack.push((x, y));
                x = fa.lml[x] - 1;
                y = fb.lml[y] - 1;
            }
        }
    }
    for (x, y) in pairs_a.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))) {
        if let (Some(na), Some(nb)) = (fa.node[x], fb.node[y]) {
            script.matched.push((na, nb));
        }
    }
    script.matched.sort_unstable();
    script.deleted = deleted.into_iter().filter_map(|x| fa.node[x]).collect();
    script.deleted.sort_unstable();
    script.inserted = inserted.into_iter().filter_map(|y| fb.node[y]).collect();
    script.inserted.sort_unstable();
    script
}

/// Original-program nodes that must change to obtain `improved`: deleted
/// and relabelled nodes, plus the nearest matched ancestor of every
/// inserted node.
pub fn diff_improvement_nodes(original: &Program, improved: &Program) -> BTreeSet<NodeId> {
    let script = tree_edit(original, improved);
    let mut out: BTreeSet<NodeId> = script.deleted.iter().copied().collect();
    let mut back = vec![None; improved.len()];
    for &(a, b) in &script.matched {
        back[b.index()] = Some(a);
        if original.kind(a).label() != improved.kind(b).label() {
            out.insert(a);
        }
    }
    for &ins in &script.inserted {
        let mut cur = improved.parent(ins);
        while let Some(c) = cur {
            if let Some(a) = back[c.index()] {
                out.insert(a);
                break;
            }
            cur = improved.parent(c);
        }
    }
    out
}
