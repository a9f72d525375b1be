//! Pure structural edits. Every edit returns a fresh [`Program`] with dense
//! breadth-first ids; the input is never modified.

use super::ast::{Category, NodeId, NodeKind, Program, Tree};
use super::EditError;

/// Node ids in breadth-first order, optionally restricted to one category.
pub fn enumerate_nodes(p: &Program, filter: Option<Category>) -> Vec<NodeId> {
    p.nodes().iter().filter(|n| filter.is_none_or(|c| n.category() == c)).map(|n| n.id).collect()
}

/// Result of [`delete_statement`].
#[derive(Debug, Clone)]
pub struct Deletion {
    pub program: Program,
    /// `mapping[old] = Some(new)` for every surviving node.
    pub mapping: Vec<Option<NodeId>>,
}

/// Removes statement `target` together with its whole subtree.
pub fn delete_statement(p: &Program, target: NodeId) -> Result<Deletion, EditError> {
    let node = p.get(target).ok_or(EditError::UnknownNode(target))?;
    if !node.kind.is_statement() || p.is_function_body(target) {
        return Err(EditError::NotAStatement(target));
    }
    let parent = node.parent.expect("statements below a function body have parents");
    let position = p.children(parent).iter().position(|&c| c == target).expect("child of parent");

    let trees = rebuild(p, &mut |id, tree| {
        if id == parent {
            tree.children.remove(position);
            if let NodeKind::If { then_len, .. } = &mut tree.kind {
                if position <= *then_len {
                    *then_len -= 1;
                }
            }
        }
    });
    let program = Program::from_functions(trees);

    // Breadth-first order of the survivors is unchanged by removing a subtree.
    let removed = p.subtree_ids(target);
    let mut dead = vec![false; p.len()];
    for r in removed {
        dead[r.0] = true;
    }
    let mut next = 0;
    let mapping = dead
        .iter()
        .map(|&d| {
            if d {
                None
            } else {
                next += 1;
                Some(NodeId(next - 1))
            }
        })
        .collect();
    debug_assert_eq!(next, program.len());
    Ok(Deletion { program, mapping })
}

/// Puts a deep clone of `donor` in `target`'s slot.
pub fn replace_node(p: &Program, target: NodeId, donor: &Tree) -> Result<Program, EditError> {
    let node = p.get(target).ok_or(EditError::UnknownNode(target))?;
    let (want, got) = (node.category(), donor.category());
    if want != got {
        return Err(EditError::CategoryMismatch { target, expected: want, found: got });
    }
    let mut replacement = Some(donor.clone());
    let trees = rebuild(p, &mut |id, tree| {
        if id == target {
            *tree = replacement.take().expect("single target");
        }
    });
    Ok(Program::from_functions(trees))
}

/// Rebuilds owned trees bottom-up, letting `edit` rewrite each node after
/// its children have been built.
fn rebuild(p: &Program, edit: &mut dyn FnMut(NodeId, &mut Tree)) -> Vec<Tree> {
    fn go(p: &Program, id: NodeId, edit: &mut dyn FnMut(NodeId, &mut Tree)) -> Tree {
        let node = p.node(id);
        let mut tree = Tree {
            kind: node.kind.clone(),
            children: node.children.iter().map(|&c| go(p, c, edit)).collect(),
            span: node.span,
        };
        edit(id, &mut tree);
        tree
    }
    p.functions().map(|f| go(p, f, edit)).collect()
}
