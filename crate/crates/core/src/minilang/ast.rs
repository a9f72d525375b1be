//! Tree representation of MiniLang programs.
//!
//! A [`Program`] is an immutable arena of [`AstNode`]s whose identifiers are
//! assigned breadth-first over the forest of function declarations. Edits
//! work on owned [`Tree`] values and rebuild the arena, so ids are always
//! dense.

use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    IntArray,
    Void,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Bool => "bool",
            Type::IntArray => "int[]",
            Type::Void => "void",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

impl UnOp {
    pub const ALL: [UnOp; 2] = [UnOp::Not, UnOp::Neg];

    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepOp {
    Inc,
    Dec,
}

impl StepOp {
    pub const ALL: [StepOp; 2] = [StepOp::Inc, StepOp::Dec];

    pub fn symbol(self) -> &'static str {
        match self {
            StepOp::Inc => "++",
            StepOp::Dec => "--",
        }
    }
}

/// One language-defined operator symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    Binary(BinOp),
    Unary(UnOp),
    Step(StepOp),
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Binary(op) => op.symbol(),
            Operator::Unary(op) => op.symbol(),
            Operator::Step(op) => op.symbol(),
        }
    }

    /// Every operator that can stand in the same syntactic slot.
    pub fn same_arity(self) -> Vec<Operator> {
        match self {
            Operator::Binary(_) => BinOp::ALL.iter().map(|&o| Operator::Binary(o)).collect(),
            Operator::Unary(_) => UnOp::ALL.iter().map(|&o| Operator::Unary(o)).collect(),
            Operator::Step(_) => StepOp::ALL.iter().map(|&o| Operator::Step(o)).collect(),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Unary(UnOp::Neg) => f.write_str("unary-"),
            other => f.write_str(other.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Statement,
    Expression,
    Operator,
    Declaration,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

/// Node kind plus its payload.
///
/// Child layouts:
/// - `FunctionDecl`: `[body Block]`
/// - `Block`: statements
/// - `VarDecl`: `[init]`
/// - `Assign`: `[target, value]`
/// - `If`: `[cond, then.., else..]`, the first `then_len` statements after
///   the condition form the then-branch
/// - `For`: `[init, cond, update, body..]`, `var` is the declared int counter
/// - `While`: `[cond, body..]`
/// - `Return`: `[]` or `[value]`
/// - `ExprStmt`: `[expr]`
/// - `Binary`: `[lhs, Operator, rhs]`
/// - `Unary`: `[Operator, operand]`
/// - `IncDec`: `[target, Operator]`
/// - `Call`: arguments
/// - `Index`: `[array, index]`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    FunctionDecl { name: String, ret: Type, params: Vec<Param> },
    Block,
    VarDecl { name: String, ty: Type },
    Assign,
    If { then_len: usize, has_else: bool },
    For { var: String },
    While,
    Return,
    ExprStmt,
    Binary,
    Unary,
    IncDec,
    Call { name: String },
    Index,
    Identifier { name: String },
    IntLiteral(i64),
    BoolLiteral(bool),
    Operator(Operator),
}

impl NodeKind {
    pub fn category(&self) -> Category {
        match self {
            NodeKind::FunctionDecl { .. } => Category::Declaration,
            NodeKind::Block
            | NodeKind::VarDecl { .. }
            | NodeKind::Assign
            | NodeKind::If { .. }
            | NodeKind::For { .. }
            | NodeKind::While
            | NodeKind::Return
            | NodeKind::ExprStmt => Category::Statement,
            NodeKind::Operator(_) => Category::Operator,
            NodeKind::Binary
            | NodeKind::Unary
            | NodeKind::IncDec
            | NodeKind::Call { .. }
            | NodeKind::Index
            | NodeKind::Identifier { .. }
            | NodeKind::IntLiteral(_)
            | NodeKind::BoolLiteral(_) => Category::Expression,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::FunctionDecl { .. } => "FunctionDecl",
            NodeKind::Block => "Block",
            NodeKind::VarDecl { .. } => "VarDecl",
            NodeKind::Assign => "Assign",
            NodeKind::If { .. } => "If",
            NodeKind::For { .. } => "For",
            NodeKind::While => "While",
            NodeKind::Return => "Return",
            NodeKind::ExprStmt => "ExprStmt",
            NodeKind::Binary => "Binary",
            NodeKind::Unary => "Unary",
            NodeKind::IncDec => "IncDec",
            NodeKind::Call { .. } => "Call",
            NodeKind::Index => "Index",
            NodeKind::Identifier { .. } => "Identifier",
            NodeKind::IntLiteral(_) => "IntLiteral",
            NodeKind::BoolLiteral(_) => "BoolLiteral",
            NodeKind::Operator(_) => "Operator",
        }
    }

    pub fn is_statement(&self) -> bool {
        self.category() == Category::Statement
    }

    /// Kind and payload with layout-only bookkeeping (`If::then_len`)
    /// erased; two nodes with equal labels are the same code element.
    pub fn label(&self) -> String {
        match self {
            NodeKind::FunctionDecl { name, ret, params } => {
                let ps: Vec<String> = params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
                format!("FunctionDecl:{ret} {name}({})", ps.join(","))
            }
            NodeKind::VarDecl { name, ty } => format!("VarDecl:{ty} {name}"),
            NodeKind::If { has_else, .. } => format!("If:{has_else}"),
            NodeKind::For { var } => format!("For:{var}"),
            NodeKind::Call { name } => format!("Call:{name}"),
            NodeKind::Identifier { name } => format!("Identifier:{name}"),
            NodeKind::IntLiteral(v) => format!("IntLiteral:{v}"),
            NodeKind::BoolLiteral(v) => format!("BoolLiteral:{v}"),
            NodeKind::Operator(op) => format!("Operator:{op}"),
            other => other.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

/// An owned subtree. Equality and hashing are structural and ignore spans.
#[derive(Debug, Clone)]
pub struct Tree {
    pub kind: NodeKind,
    pub children: Vec<Tree>,
    pub span: Option<Span>,
}

impl Tree {
    pub fn new(kind: NodeKind, children: Vec<Tree>) -> Self {
        Tree { kind, children, span: None }
    }

    pub fn leaf(kind: NodeKind) -> Self {
        Tree::new(kind, Vec::new())
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn category(&self) -> Category {
        self.kind.category()
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.children == other.children
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.children.hash(state);
    }
}

#[derive(Debug, Clone)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub span: Option<Span>,
}

impl AstNode {
    pub fn category(&self) -> Category {
        self.kind.category()
    }
}

/// An immutable program: a forest of function declarations stored as a
/// breadth-first numbered node table.
#[derive(Debug, Clone)]
pub struct Program {
    nodes: Vec<AstNode>,
    functions: usize,
}

impl Program {
    /// Builds the node table for a list of function declaration trees.
    pub fn from_functions(functions: Vec<Tree>) -> Program {
        let count = functions.len();
        let mut nodes: Vec<AstNode> = Vec::with_capacity(functions.iter().map(Tree::size).sum());
        let mut queue: VecDeque<(Tree, Option<NodeId>)> = functions.into_iter().map(|f| (f, None)).collect();
        while let Some((tree, parent)) = queue.pop_front() {
            let id = NodeId(nodes.len());
            if let Some(p) = parent {
                nodes[p.0].children.push(id);
            }
            let Tree { kind, children, span } = tree;
            nodes.push(AstNode { id, kind, parent, children: Vec::with_capacity(children.len()), span });
            queue.extend(children.into_iter().map(|c| (c, Some(id))));
        }
        Program { nodes, functions: count }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&AstNode> {
        self.nodes.get(id.0)
    }

    pub fn nodes(&self) -> &[AstNode] {
        &self.nodes
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.0].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    /// Function declaration roots, in source order.
    pub fn functions(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.functions).map(NodeId)
    }

    pub fn function_count(&self) -> usize {
        self.functions
    }

    /// True for the block that forms a function's body.
    pub fn is_function_body(&self, id: NodeId) -> bool {
        matches!(self.parent(id), Some(p) if matches!(self.kind(p), NodeKind::FunctionDecl { .. }))
    }

    pub fn is_ancestor(&self, ancestor: NodeId, mut node: NodeId) -> bool {
        while let Some(p) = self.parent(node) {
            if p == ancestor {
                return true;
            }
            node = p;
        }
        false
    }

    /// Nearest statement containing `id`, `id` itself included.
    pub fn enclosing_statement(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = Some(id);
        while let Some(n) = cur {
            if self.kind(n).is_statement() {
                return Some(n);
            }
            cur = self.parent(n);
        }
        None
    }

    /// Nearest strict ancestor that is a statement.
    pub fn parent_statement(&self, id: NodeId) -> Option<NodeId> {
        self.parent(id).and_then(|p| self.enclosing_statement(p))
    }

    /// Ids of `id` and all its descendants, in pre-order.
    pub fn subtree_ids(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev().copied());
        }
        out
    }

    pub fn subtree(&self, id: NodeId) -> Tree {
        let node = self.node(id);
        Tree {
            kind: node.kind.clone(),
            children: node.children.iter().map(|&c| self.subtree(c)).collect(),
            span: node.span,
        }
    }

    pub fn to_trees(&self) -> Vec<Tree> {
        self.functions().map(|f| self.subtree(f)).collect()
    }

    /// Root function declaration containing `id`.
    pub fn function_of(&self, mut id: NodeId) -> NodeId {
        while let Some(p) = self.parent(id) {
            id = p;
        }
        id
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.functions == other.functions
            && self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| a.kind == b.kind && a.children == b.children)
    }
}

impl Eq for Program {}
