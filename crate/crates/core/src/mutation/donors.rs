use std::collections::HashSet;

use super::MutationDescriptor;
use crate::minilang::{Category, NodeId, NodeKind, Program, Tree};

/// Distinct code elements of one program, grouped by category, in
/// breadth-first order of first occurrence.
#[derive(Debug, Clone)]
pub(crate) struct DonorPool {
    expressions: Vec<Tree>,
    statements: Vec<Tree>,
}

impl DonorPool {
    pub(crate) fn new(p: &Program) -> Self {
        let mut pool = DonorPool { expressions: Vec::new(), statements: Vec::new() };
        let mut seen = HashSet::new();
        for n in p.nodes() {
            let list = match n.category() {
                Category::Expression => &mut pool.expressions,
                Category::Statement => &mut pool.statements,
                _ => continue,
            };
            let t = p.subtree(n.id);
            if seen.insert(t.clone()) {
                list.push(t);
            }
        }
        pool
    }

    pub(crate) fn replacements(&self, p: &Program, target: NodeId) -> Vec<MutationDescriptor> {
        let own = || p.subtree(target);
        let from = |list: &[Tree]| {
            let own = own();
            list.iter().filter(|t| **t != own).map(|t| MutationDescriptor::replace(target, t.clone())).collect()
        };
        match p.kind(target) {
            NodeKind::Operator(op) => op
                .same_arity()
                .into_iter()
                .filter(|o| o != op)
                .map(|o| MutationDescriptor::replace(target, Tree::leaf(NodeKind::Operator(o))))
                .collect(),
            k if k.category() == Category::Expression => from(&self.expressions),
            // A function body stays a block.
            _ if p.is_function_body(target) => {
                let blocks: Vec<Tree> = self.statements.iter().filter(|t| t.kind == NodeKind::Block).cloned().collect();
                from(&blocks)
            }
            k if k.category() == Category::Statement => from(&self.statements),
            _ => Vec::new(),
        }
    }
}

/// Every single-node replacement of `target`: each distinct same-category
/// subtree of `p` other than `target`'s own, or for operators every
/// language operator of the same arity.
pub fn generate_replacements(p: &Program, target: NodeId) -> Vec<MutationDescriptor> {
    if p.get(target).is_none() {
        return Vec::new();
    }
    DonorPool::new(p).replacements(p, target)
}
