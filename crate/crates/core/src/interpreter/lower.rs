//! Resolves identifiers to frame slots and calls to function indices so the
//! evaluator never touches names. Only valid for compilable programs.

use std::collections::HashMap;

use crate::minilang::{BinOp, NodeId, NodeKind, Operator, Program, StepOp, UnOp};

#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Int(i64),
    Bool(bool),
    Local(usize),
    Index(Box<Expr>, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Step(StepOp, Box<Place>),
    Call(usize, Vec<Expr>),
    Len(Box<Expr>),
    NewArray(Box<Expr>),
}

#[derive(Debug, Clone)]
pub(crate) enum Place {
    Local(usize),
    Elem(Expr, Expr),
}

#[derive(Debug, Clone)]
pub(crate) enum StmtKind {
    Block(Vec<Stmt>),
    Decl(usize, Expr),
    Assign(Place, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    For { slot: usize, init: Expr, cond: Expr, update: Expr, body: Vec<Stmt> },
    While(Expr, Vec<Stmt>),
    Return(Option<Expr>),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub(crate) struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub(crate) struct Function {
    pub params: usize,
    pub slots: usize,
    pub body: Stmt,
}

pub(crate) fn lower(p: &Program) -> Vec<Function> {
    let index: HashMap<String, usize> = p
        .functions()
        .enumerate()
        .filter_map(|(i, f)| match p.kind(f) {
            NodeKind::FunctionDecl { name, .. } => Some((name.clone(), i)),
            _ => None,
        })
        .collect();
    p.functions()
        .map(|f| {
            let NodeKind::FunctionDecl { params, .. } = p.kind(f) else { unreachable!("function root") };
            let mut l = Lowerer { p, functions: &index, scopes: vec![HashMap::new()], slots: 0 };
            for param in params {
                l.declare(&param.name);
            }
            let body = l.stmt(p.children(f)[0]);
            Function { params: params.len(), slots: l.slots, body }
        })
        .collect()
}

struct Lowerer<'a> {
    p: &'a Program,
    functions: &'a HashMap<String, usize>,
    scopes: Vec<HashMap<String, usize>>,
    slots: usize,
}

impl Lowerer<'_> {
    fn declare(&mut self, name: &str) -> usize {
        let slot = self.slots;
        self.slots += 1;
        self.scopes.last_mut().expect("scope").insert(name.to_string(), slot);
        slot
    }

    fn resolve(&self, name: &str) -> usize {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied()).expect("checked identifier")
    }

    fn scoped(&mut self, ids: &[NodeId]) -> Vec<Stmt> {
        self.scopes.push(HashMap::new());
        let out = ids.iter().map(|&s| self.stmt(s)).collect();
        self.scopes.pop();
        out
    }

    fn stmt(&mut self, id: NodeId) -> Stmt {
        let p = self.p;
        let c = p.children(id);
        let kind = match p.kind(id) {
            NodeKind::Block => StmtKind::Block(self.scoped(c)),
            NodeKind::VarDecl { name, .. } => {
                let init = self.expr(c[0]);
                StmtKind::Decl(self.declare(name), init)
            }
            NodeKind::Assign => StmtKind::Assign(self.place(c[0]), self.expr(c[1])),
            NodeKind::If { then_len, .. } => {
                let split = (1 + then_len).min(c.len());
                StmtKind::If(self.expr(c[0]), self.scoped(&c[1..split]), self.scoped(&c[split..]))
            }
            NodeKind::For { var } => {
                self.scopes.push(HashMap::new());
                let init = self.expr(c[0]);
                let slot = self.declare(var);
                let cond = self.expr(c[1]);
                let update = self.expr(c[2]);
                let body = self.scoped(&c[3..]);
                self.scopes.pop();
                StmtKind::For { slot, init, cond, update, body }
            }
            NodeKind::While => StmtKind::While(self.expr(c[0]), self.scoped(&c[1..])),
            NodeKind::Return => StmtKind::Return(c.first().map(|&v| self.expr(v))),
            NodeKind::ExprStmt => StmtKind::Expr(self.expr(c[0])),
            other => unreachable!("{} in statement position", other.name()),
        };
        Stmt { id, kind }
    }

    fn place(&mut self, id: NodeId) -> Place {
        let c = self.p.children(id);
        match self.p.kind(id) {
            NodeKind::Identifier { name } => Place::Local(self.resolve(name)),
            NodeKind::Index => Place::Elem(self.expr(c[0]), self.expr(c[1])),
            other => unreachable!("{} is not assignable", other.name()),
        }
    }

    fn expr(&mut self, id: NodeId) -> Expr {
        let p = self.p;
        let c = p.children(id);
        let op = |n: NodeId| match p.kind(n) {
            NodeKind::Operator(op) => *op,
            other => unreachable!("{} in operator slot", other.name()),
        };
        match p.kind(id) {
            NodeKind::IntLiteral(v) => Expr::Int(*v),
            NodeKind::BoolLiteral(b) => Expr::Bool(*b),
            NodeKind::Identifier { name } => Expr::Local(self.resolve(name)),
            NodeKind::Index => Expr::Index(Box::new(self.expr(c[0])), Box::new(self.expr(c[1]))),
            NodeKind::Binary => {
                let Operator::Binary(b) = op(c[1]) else { unreachable!("binary operator") };
                Expr::Binary(b, Box::new(self.expr(c[0])), Box::new(self.expr(c[2])))
            }
            NodeKind::Unary => {
                let Operator::Unary(u) = op(c[0]) else { unreachable!("unary operator") };
                Expr::Unary(u, Box::new(self.expr(c[1])))
            }
            NodeKind::IncDec => {
                let Operator::Step(s) = op(c[1]) else { unreachable!("step operator") };
                Expr::Step(s, Box::new(self.place(c[0])))
            }
            NodeKind::Call { name } => {
                let mut args: Vec<Expr> = c.iter().map(|&a| self.expr(a)).collect();
                match (name.as_str(), self.functions.get(name)) {
                    ("len", None) => Expr::Len(Box::new(args.remove(0))),
                    ("new_array", None) => Expr::NewArray(Box::new(args.remove(0))),
                    (_, Some(&f)) => Expr::Call(f, args),
                    _ => unreachable!("checked call"),
                }
            }
            other => unreachable!("{} in expression position", other.name()),
        }
    }
}
