//! Static checking: scoping, typing, arity and definite return.
//!
//! A program with no violations is "compilable". Violations are data; the
//! checker never fails.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, NodeId, NodeKind, Operator, Program, StepOp, Type, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationReason {
    UndeclaredIdentifier,
    TypeMismatch,
    DuplicateDeclaration,
    ArityMismatch,
    BadAssignTarget,
    MissingReturn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StaticViolation {
    pub node: NodeId,
    pub reason: ViolationReason,
}

/// Built-in functions available to every program.
pub const BUILTINS: [(&str, &[Type], Type); 2] =
    [("len", &[Type::IntArray], Type::Int), ("new_array", &[Type::Int], Type::IntArray)];

pub(crate) struct Signature {
    pub params: Vec<Type>,
    pub ret: Type,
}

pub(crate) fn signatures(p: &Program) -> HashMap<String, Signature> {
    let mut sigs = HashMap::new();
    for (name, params, ret) in BUILTINS {
        sigs.insert(name.to_string(), Signature { params: params.to_vec(), ret });
    }
    for f in p.functions() {
        if let NodeKind::FunctionDecl { name, ret, params } = p.kind(f) {
            sigs.entry(name.clone())
                .or_insert_with(|| Signature { params: params.iter().map(|p| p.ty).collect(), ret: *ret });
        }
    }
    sigs
}

pub fn static_check(p: &Program) -> Vec<StaticViolation> {
    let mut checker = Checker { p, sigs: signatures(p), scopes: Vec::new(), ret: Type::Void, out: Vec::new() };
    checker.program();
    let mut out = checker.out;
    out.sort();
    out.dedup();
    out
}

pub fn is_compilable(p: &Program) -> bool {
    static_check(p).is_empty()
}

struct Checker<'a> {
    p: &'a Program,
    sigs: HashMap<String, Signature>,
    scopes: Vec<HashMap<String, Type>>,
    ret: Type,
    out: Vec<StaticViolation>,
}

impl Checker<'_> {
    fn report(&mut self, node: NodeId, reason: ViolationReason) {
        self.out.push(StaticViolation { node, reason });
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn declare(&mut self, node: NodeId, name: &str, ty: Type) {
        if self.lookup(name).is_some() {
            self.report(node, ViolationReason::DuplicateDeclaration);
            return;
        }
        self.scopes.last_mut().expect("scope").insert(name.to_string(), ty);
    }

    fn program(&mut self) {
        let p = self.p;
        let mut seen: Vec<&str> = BUILTINS.iter().map(|b| b.0).collect();
        for f in p.functions() {
            let NodeKind::FunctionDecl { name, ret, params } = p.kind(f) else { continue };
            if seen.contains(&name.as_str()) {
                self.report(f, ViolationReason::DuplicateDeclaration);
            }
            seen.push(name);
            self.ret = *ret;
            self.scopes.push(HashMap::new());
            for param in params {
                if param.ty == Type::Void {
                    self.report(f, ViolationReason::TypeMismatch);
                }
                self.declare(f, &param.name, param.ty);
            }
            let body = p.children(f)[0];
            if p.kind(body) != &NodeKind::Block {
                self.report(body, ViolationReason::TypeMismatch);
            }
            self.statement(body);
            self.scopes.pop();
            if *ret != Type::Void && !self.returns(body) {
                self.report(f, ViolationReason::MissingReturn);
            }
        }
    }

    fn returns(&self, s: NodeId) -> bool {
        let p = self.p;
        let c = p.children(s);
        match p.kind(s) {
            NodeKind::Return => true,
            NodeKind::Block => c.iter().any(|&x| self.returns(x)),
            NodeKind::If { then_len, has_else: true } => {
                let split = (1 + then_len).min(c.len());
                c[1..split].iter().any(|&x| self.returns(x)) && c[split..].iter().any(|&x| self.returns(x))
            }
            _ => false,
        }
    }

    fn scoped(&mut self, stmts: &[NodeId]) {
        self.scopes.push(HashMap::new());
        for &s in stmts {
            self.statement(s);
        }
        self.scopes.pop();
    }

    fn expect(&mut self, e: NodeId, want: Type) {
        if let Some(got) = self.expr(e) {
            if got != want {
                self.report(e, ViolationReason::TypeMismatch);
            }
        }
    }

    fn statement(&mut self, s: NodeId) {
        let p = self.p;
        let c = p.children(s);
        match p.kind(s) {
            NodeKind::Block => self.scoped(c),
            NodeKind::VarDecl { name, ty } => {
                if *ty == Type::Void {
                    self.report(s, ViolationReason::TypeMismatch);
                }
                if let Some(got) = self.expr(c[0]) {
                    if got != *ty {
                        self.report(s, ViolationReason::TypeMismatch);
                    }
                }
                self.declare(s, name, *ty);
            }
            NodeKind::Assign => {
                let target = self.lvalue(c[0]);
                let value = self.expr(c[1]);
                if let (Some(t), Some(v)) = (target, value) {
                    if t != v {
                        self.report(s, ViolationReason::TypeMismatch);
                    }
                }
            }
            NodeKind::If { then_len, .. } => {
                self.expect(c[0], Type::Bool);
                let split = (1 + then_len).min(c.len());
                self.scoped(&c[1..split]);
                self.scoped(&c[split..]);
            }
            NodeKind::For { var } => {
                self.scopes.push(HashMap::new());
                self.expect(c[0], Type::Int);
                self.declare(s, var, Type::Int);
                self.expect(c[1], Type::Bool);
                self.statement_expr(c[2]);
                self.scoped(&c[3..]);
                self.scopes.pop();
            }
            NodeKind::While => {
                self.expect(c[0], Type::Bool);
                self.scoped(&c[1..]);
            }
            NodeKind::Return => match (c.first(), self.ret) {
                (None, Type::Void) => {}
                (None, _) => self.report(s, ViolationReason::TypeMismatch),
                (Some(&v), Type::Void) => {
                    self.expr(v);
                    self.report(s, ViolationReason::TypeMismatch);
                }
                (Some(&v), ret) => self.expect(v, ret),
            },
            NodeKind::ExprStmt => self.statement_expr(c[0]),
            _ => self.report(s, ViolationReason::TypeMismatch),
        }
    }

    /// As in Java, only `x++`/`x--` and calls may stand alone as a
    /// statement or loop update; `h;` is rejected.
    fn statement_expr(&mut self, e: NodeId) {
        self.expr(e);
        if !matches!(self.p.kind(e), NodeKind::IncDec | NodeKind::Call { .. }) {
            self.report(e, ViolationReason::TypeMismatch);
        }
    }

    /// Type of an assignable expression, reporting non-assignable targets.
    fn lvalue(&mut self, e: NodeId) -> Option<Type> {
        match self.p.kind(e) {
            NodeKind::Identifier { .. } | NodeKind::Index => self.expr(e),
            _ => {
                self.expr(e);
                self.report(e, ViolationReason::BadAssignTarget);
                None
            }
        }
    }

    fn operator(&self, node: NodeId) -> Option<Operator> {
        match self.p.kind(node) {
            NodeKind::Operator(op) => Some(*op),
            _ => None,
        }
    }

    fn expr(&mut self, e: NodeId) -> Option<Type> {
        use ViolationReason::*;
        let p = self.p;
        let c = p.children(e);
        match p.kind(e) {
            NodeKind::IntLiteral(_) => Some(Type::Int),
            NodeKind::BoolLiteral(_) => Some(Type::Bool),
            NodeKind::Identifier { name } => {
                let ty = self.lookup(name);
                if ty.is_none() {
                    self.report(e, UndeclaredIdentifier);
                }
                ty
            }
            NodeKind::Binary => {
                let lhs = self.expr(c[0]);
                let rhs = self.expr(c[2]);
                let Some(Operator::Binary(op)) = self.operator(c[1]) else {
                    self.report(c[1], TypeMismatch);
                    return None;
                };
                let (operands, result) = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => (Some(Type::Int), Type::Int),
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (Some(Type::Int), Type::Bool),
                    BinOp::And | BinOp::Or => (Some(Type::Bool), Type::Bool),
                    BinOp::Eq | BinOp::Ne => (None, Type::Bool),
                };
                if let (Some(l), Some(r)) = (lhs, rhs) {
                    let ok = match operands {
                        Some(want) => l == want && r == want,
                        None => l == r && matches!(l, Type::Int | Type::Bool),
                    };
                    if !ok {
                        self.report(e, TypeMismatch);
                    }
                }
                Some(result)
            }
            NodeKind::Unary => {
                let operand = self.expr(c[1]);
                let want = match self.operator(c[0]) {
                    Some(Operator::Unary(UnOp::Not)) => Type::Bool,
                    Some(Operator::Unary(UnOp::Neg)) => Type::Int,
                    _ => {
                        self.report(c[0], TypeMismatch);
                        return None;
                    }
                };
                if operand.is_some_and(|t| t != want) {
                    self.report(e, TypeMismatch);
                }
                Some(want)
            }
            NodeKind::IncDec => {
                let target = self.lvalue(c[0]);
                if !matches!(self.operator(c[1]), Some(Operator::Step(StepOp::Inc | StepOp::Dec))) {
                    self.report(c[1], TypeMismatch);
                }
                if target.is_some_and(|t| t != Type::Int) {
                    self.report(e, TypeMismatch);
                }
                Some(Type::Int)
            }
            NodeKind::Index => {
                self.expect(c[0], Type::IntArray);
                self.expect(c[1], Type::Int);
                Some(Type::Int)
            }
            NodeKind::Call { name } => {
                let args: Vec<Option<Type>> = c.iter().map(|&a| self.expr(a)).collect();
                let Some(sig) = self.sigs.get(name) else {
                    self.report(e, UndeclaredIdentifier);
                    return None;
                };
                let ret = sig.ret;
                if sig.params.len() != args.len() {
                    self.report(e, ArityMismatch);
                } else if sig.params.iter().zip(&args).any(|(want, got)| got.is_some_and(|g| g != *want)) {
                    self.report(e, TypeMismatch);
                }
                Some(ret)
            }
            _ => {
                self.report(e, TypeMismatch);
                None
            }
        }
    }
}
