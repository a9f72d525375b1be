//! Deterministic tree-walking evaluator with a step-cost counter.
//!
//! One step is charged for every statement entry and every expression node
//! evaluated (loop conditions are charged each time they are checked).
//! Operator nodes are part of their parent's evaluation and cost nothing
//! on their own. A run stops with [`Status::Timeout`] the moment the
//! counter reaches its limit.

mod lower;

use std::cell::RefCell;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{static_check, BinOp, NodeKind, Program, StaticViolation, StepOp, Type, UnOp};
use lower::{Expr, Function, Place, Stmt, StmtKind};

/// Maximum number of simultaneously active frames, entry call included.
pub const MAX_FRAMES: usize = 512;
/// Largest array `new_array` will allocate.
pub const MAX_ARRAY_LEN: i64 = 1 << 20;
/// Step cap used when measuring an unmutated program.
pub const BOOTSTRAP_CAP: u64 = 50_000_000;
/// Minimum per-test step limit.
pub const MIN_LIMIT: u64 = 100;
pub const DEFAULT_TIMEOUT_FACTOR: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    #[serde(rename = "input")]
    pub input_array: Vec<i64>,
    #[serde(rename = "args")]
    pub extra_args: Vec<i64>,
    #[serde(rename = "expected")]
    pub expected_output: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuntimeErrorKind {
    IndexOutOfBounds,
    DivideByZero,
    StackOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Completed,
    RuntimeError(RuntimeErrorKind),
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub status: Status,
    pub steps: u64,
    /// Final contents of the input array; present iff the run completed.
    pub final_array: Option<Vec<i64>>,
}

impl ExecutionOutcome {
    pub fn error_kind(&self) -> Option<RuntimeErrorKind> {
        match self.status {
            Status::RuntimeError(k) => Some(k),
            _ => None,
        }
    }

    pub fn completed(&self) -> bool {
        self.status == Status::Completed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub total_cost: u64,
    /// Number of tests whose final array equals the expected output.
    pub correct: usize,
    pub per_test: Vec<ExecutionOutcome>,
}

impl SuiteResult {
    pub fn tests(&self) -> usize {
        self.per_test.len()
    }

    /// Fraction of exactly matching tests; an empty suite is vacuously 1.0.
    pub fn correctness(&self) -> f64 {
        if self.per_test.is_empty() {
            1.0
        } else {
            self.correct as f64 / self.per_test.len() as f64
        }
    }

    pub fn fully_correct(&self) -> bool {
        self.correct == self.per_test.len()
    }

    pub fn any_timeout(&self) -> bool {
        self.per_test.iter().any(|o| o.status == Status::Timeout)
    }

    pub fn any_runtime_error(&self) -> bool {
        self.per_test.iter().any(|o| matches!(o.status, Status::RuntimeError(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("program is not compilable ({} violation(s))", .0.len())]
    NotCompilable(Vec<StaticViolation>),
    #[error("program has no functions")]
    NoEntry,
    #[error("entry function expects ({expected}) but the test supplies an array and {supplied} int(s)")]
    EntrySignature { expected: String, supplied: usize },
    #[error("step limit must be at least 1")]
    ZeroLimit,
    #[error("{limits} step limit(s) given for {tests} test(s)")]
    LimitCount { tests: usize, limits: usize },
    #[error("original program does not complete test {test}: {status:?} after {steps} steps")]
    BaselineDiverged { test: usize, status: Status, steps: u64 },
}

/// A compiled program ready to run; entry point is the first function.
#[derive(Debug, Clone)]
pub struct Executable {
    functions: Vec<Function>,
    entry_params: Vec<Type>,
    statement_slots: usize,
}

impl Executable {
    pub fn compile(p: &Program) -> Result<Executable, InterpError> {
        let violations = static_check(p);
        if !violations.is_empty() {
            return Err(InterpError::NotCompilable(violations));
        }
        let entry = p.functions().next().ok_or(InterpError::NoEntry)?;
        let NodeKind::FunctionDecl { params, .. } = p.kind(entry) else { return Err(InterpError::NoEntry) };
        Ok(Executable {
            functions: lower::lower(p),
            entry_params: params.iter().map(|p| p.ty).collect(),
            statement_slots: p.len(),
        })
    }

    fn check_entry(&self, t: &TestCase) -> Result<(), InterpError> {
        let want = std::iter::once(Type::IntArray).chain(std::iter::repeat_n(Type::Int, t.extra_args.len()));
        if !self.entry_params.iter().copied().eq(want) {
            let expected: Vec<String> = self.entry_params.iter().map(Type::to_string).collect();
            return Err(InterpError::EntrySignature { expected: expected.join(", "), supplied: t.extra_args.len() });
        }
        Ok(())
    }

    pub fn execute(&self, t: &TestCase, step_limit: u64) -> Result<ExecutionOutcome, InterpError> {
        self.run(t, step_limit, None)
    }

    /// Runs one test while adding statement entry counts into `counts`
    /// (indexed by node id).
    pub fn execute_counting(
        &self,
        t: &TestCase,
        step_limit: u64,
        counts: &mut [u64],
    ) -> Result<ExecutionOutcome, InterpError> {
        assert!(counts.len() >= self.statement_slots, "count buffer too small");
        self.run(t, step_limit, Some(counts))
    }

    fn run(&self, t: &TestCase, step_limit: u64, counts: Option<&mut [u64]>) -> Result<ExecutionOutcome, InterpError> {
        if step_limit == 0 {
            return Err(InterpError::ZeroLimit);
        }
        self.check_entry(t)?;
        let array = Rc::new(RefCell::new(t.input_array.clone()));
        let mut args = vec![Value::Array(array.clone())];
        args.extend(t.extra_args.iter().map(|&v| Value::Int(v)));
        let mut machine = Machine { functions: &self.functions, steps: 0, limit: step_limit, depth: 0, counts };
        let status = match machine.call(0, args) {
            Ok(_) => Status::Completed,
            Err(Trap::Timeout) => Status::Timeout,
            Err(Trap::Error(kind)) => Status::RuntimeError(kind),
        };
        let final_array = (status == Status::Completed).then(|| array.borrow().clone());
        Ok(ExecutionOutcome { status, steps: machine.steps, final_array })
    }

    pub fn run_suite(&self, suite: &[TestCase], limits: &[u64]) -> Result<SuiteResult, InterpError> {
        if suite.len() != limits.len() {
            return Err(InterpError::LimitCount { tests: suite.len(), limits: limits.len() });
        }
        let mut result = SuiteResult { total_cost: 0, correct: 0, per_test: Vec::with_capacity(suite.len()) };
        for (t, &limit) in suite.iter().zip(limits) {
            let outcome = self.execute(t, limit)?;
            result.total_cost += outcome.steps;
            if outcome.final_array.as_ref() == Some(&t.expected_output) {
                result.correct += 1;
            }
            result.per_test.push(outcome);
        }
        Ok(result)
    }
}

/// Runs `p` on one test. `p` must be compilable.
pub fn execute(p: &Program, t: &TestCase, step_limit: u64) -> Result<ExecutionOutcome, InterpError> {
    Executable::compile(p)?.execute(t, step_limit)
}

pub fn run_suite(p: &Program, suite: &[TestCase], limits: &[u64]) -> Result<SuiteResult, InterpError> {
    Executable::compile(p)?.run_suite(suite, limits)
}

/// `max(MIN_LIMIT, ceil(factor * steps))`.
pub fn limit_from_steps(steps: u64, factor: f64) -> u64 {
    ((steps as f64 * factor).ceil() as u64).max(MIN_LIMIT)
}

/// Per-test step limits derived from the original program's own cost.
pub fn baseline_limits(p: &Program, suite: &[TestCase], factor: f64) -> Result<Vec<u64>, InterpError> {
    Ok(Baseline::measure(p, suite, factor)?.limits)
}

/// The unmutated program's measured behaviour on a suite.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub limits: Vec<u64>,
    pub result: SuiteResult,
}

impl Baseline {
    pub fn measure(p: &Program, suite: &[TestCase], factor: f64) -> Result<Baseline, InterpError> {
        let exe = Executable::compile(p)?;
        let mut result = SuiteResult { total_cost: 0, correct: 0, per_test: Vec::with_capacity(suite.len()) };
        let mut limits = Vec::with_capacity(suite.len());
        for (i, t) in suite.iter().enumerate() {
            let outcome = exe.execute(t, BOOTSTRAP_CAP)?;
            if !outcome.completed() {
                return Err(InterpError::BaselineDiverged { test: i, status: outcome.status, steps: outcome.steps });
            }
            limits.push(limit_from_steps(outcome.steps, factor));
            result.total_cost += outcome.steps;
            if outcome.final_array.as_ref() == Some(&t.expected_output) {
                result.correct += 1;
            }
            result.per_test.push(outcome);
        }
        Ok(Baseline { limits, result })
    }

    pub fn cost(&self) -> u64 {
        self.result.total_cost
    }
}

#[derive(Debug, Clone)]
enum Value {
    Unit,
    Int(i64),
    Bool(bool),
    Array(Rc<RefCell<Vec<i64>>>),
}

impl Value {
    fn int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            other => unreachable!("checked program produced {other:?} where int expected"),
        }
    }

    fn bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => unreachable!("checked program produced {other:?} where bool expected"),
        }
    }

    fn array(&self) -> &Rc<RefCell<Vec<i64>>> {
        match self {
            Value::Array(a) => a,
            other => unreachable!("checked program produced {other:?} where array expected"),
        }
    }
}

enum Trap {
    Timeout,
    Error(RuntimeErrorKind),
}

enum Flow {
    Normal,
    Return(Value),
}

type Exec<T> = Result<T, Trap>;

struct Machine<'a, 'c> {
    functions: &'a [Function],
    steps: u64,
    limit: u64,
    depth: usize,
    counts: Option<&'c mut [u64]>,
}

fn element(arr: &[i64], idx: i64) -> Exec<usize> {
    usize::try_from(idx).ok().filter(|&i| i < arr.len()).ok_or(Trap::Error(RuntimeErrorKind::IndexOutOfBounds))
}

impl Machine<'_, '_> {
    #[inline]
    fn tick(&mut self) -> Exec<()> {
        self.steps += 1;
        if self.steps >= self.limit {
            Err(Trap::Timeout)
        } else {
            Ok(())
        }
    }

    fn call(&mut self, f: usize, args: Vec<Value>) -> Exec<Value> {
        if self.depth >= MAX_FRAMES {
            return Err(Trap::Error(RuntimeErrorKind::StackOverflow));
        }
        let functions = self.functions;
        let func = &functions[f];
        debug_assert_eq!(func.params, args.len());
        let mut frame = args;
        frame.resize(func.slots, Value::Unit);
        self.depth += 1;
        let flow = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.stmt(&func.body, &mut frame));
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            Flow::Normal => Value::Unit,
        })
    }

    fn block(&mut self, stmts: &[Stmt], frame: &mut Vec<Value>) -> Exec<Flow> {
        for s in stmts {
            if let Flow::Return(v) = self.stmt(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt, frame: &mut Vec<Value>) -> Exec<Flow> {
        self.tick()?;
        if let Some(counts) = self.counts.as_deref_mut() {
            counts[s.id.index()] += 1;
        }
        match &s.kind {
            StmtKind::Block(body) => self.block(body, frame),
            StmtKind::Decl(slot, init) => {
                frame[*slot] = self.expr(init, frame)?;
                Ok(Flow::Normal)
            }
            StmtKind::Assign(place, value) => {
                match place {
                    Place::Local(slot) => {
                        self.tick()?;
                        frame[*slot] = self.expr(value, frame)?;
                    }
                    Place::Elem(arr, idx) => {
                        self.tick()?;
                        let arr = self.expr(arr, frame)?;
                        let idx = self.expr(idx, frame)?.int();
                        let v = self.expr(value, frame)?.int();
                        let mut data = arr.array().borrow_mut();
                        let i = element(&data, idx)?;
                        data[i] = v;
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::If(cond, then, els) => {
                if self.expr(cond, frame)?.bool() {
                    self.block(then, frame)
                } else {
                    self.block(els, frame)
                }
            }
            StmtKind::For { slot, init, cond, update, body } => {
                frame[*slot] = self.expr(init, frame)?;
                while self.expr(cond, frame)?.bool() {
                    if let Flow::Return(v) = self.block(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                    self.expr(update, frame)?;
                }
                Ok(Flow::Normal)
            }
            StmtKind::While(cond, body) => {
                while self.expr(cond, frame)?.bool() {
                    if let Flow::Return(v) = self.block(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.expr(e, frame)?,
                    None => Value::Unit,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Expr(e) => {
                self.expr(e, frame)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn expr(&mut self, e: &Expr, frame: &mut Vec<Value>) -> Exec<Value> {
        self.tick()?;
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Local(slot) => frame[*slot].clone(),
            Expr::Index(arr, idx) => {
                let arr = self.expr(arr, frame)?;
                let idx = self.expr(idx, frame)?.int();
                let data = arr.array().borrow();
                Value::Int(data[element(&data, idx)?])
            }
            Expr::Binary(op, lhs, rhs) => self.binary(*op, lhs, rhs, frame)?,
            Expr::Unary(UnOp::Not, e) => Value::Bool(!self.expr(e, frame)?.bool()),
            Expr::Unary(UnOp::Neg, e) => Value::Int(self.expr(e, frame)?.int().wrapping_neg()),
            Expr::Step(op, place) => {
                let delta = match op {
                    StepOp::Inc => 1,
                    StepOp::Dec => -1,
                };
                match place.as_ref() {
                    Place::Local(slot) => {
                        self.tick()?;
                        let old = frame[*slot].int();
                        frame[*slot] = Value::Int(old.wrapping_add(delta));
                        Value::Int(old)
                    }
                    Place::Elem(arr, idx) => {
                        self.tick()?;
                        let arr = self.expr(arr, frame)?;
                        let idx = self.expr(idx, frame)?.int();
                        let mut data = arr.array().borrow_mut();
                        let i = element(&data, idx)?;
                        let old = data[i];
                        data[i] = old.wrapping_add(delta);
                        Value::Int(old)
                    }
                }
            }
            Expr::Call(f, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.expr(a, frame)?);
                }
                self.call(*f, values)?
            }
            Expr::Len(arr) => Value::Int(self.expr(arr, frame)?.array().borrow().len() as i64),
            Expr::NewArray(n) => {
                let n = self.expr(n, frame)?.int();
                if !(0..=MAX_ARRAY_LEN).contains(&n) {
                    return Err(Trap::Error(RuntimeErrorKind::IndexOutOfBounds));
                }
                Value::Array(Rc::new(RefCell::new(vec![0; n as usize])))
            }
        })
    }

    fn binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr, frame: &mut Vec<Value>) -> Exec<Value> {
        match op {
            BinOp::And => {
                return Ok(Value::Bool(self.expr(lhs, frame)?.bool() && self.expr(rhs, frame)?.bool()));
            }
            BinOp::Or => {
                return Ok(Value::Bool(self.expr(lhs, frame)?.bool() || self.expr(rhs, frame)?.bool()));
            }
            _ => {}
        }
        let l = self.expr(lhs, frame)?;
        let r = self.expr(rhs, frame)?;
        if let (BinOp::Eq | BinOp::Ne, Value::Bool(a), Value::Bool(b)) = (op, &l, &r) {
            return Ok(Value::Bool((a == b) == (op == BinOp::Eq)));
        }
        let (a, b) = (l.int(), r.int());
        Ok(match op {
            BinOp::Add => Value::Int(a.wrapping_add(b)),
            BinOp::Sub => Value::Int(a.wrapping_sub(b)),
            BinOp::Mul => Value::Int(a.wrapping_mul(b)),
            BinOp::Div | BinOp::Rem if b == 0 => return Err(Trap::Error(RuntimeErrorKind::DivideByZero)),
            BinOp::Div => Value::Int(a.wrapping_div(b)),
            BinOp::Rem => Value::Int(a.wrapping_rem(b)),
            BinOp::Lt => Value::Bool(a < b),
            BinOp::Le => Value::Bool(a <= b),
            BinOp::Gt => Value::Bool(a > b),
            BinOp::Ge => Value::Bool(a >= b),
            BinOp::Eq => Value::Bool(a == b),
            BinOp::Ne => Value::Bool(a != b),
            BinOp::And | BinOp::Or => unreachable!(),
        })
    }
}
