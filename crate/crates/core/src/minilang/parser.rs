use super::ast::{BinOp, NodeKind, Operator, Param, Program, Span, StepOp, Tree, Type, UnOp};
use super::lexer::{tokenize, Tok};
use super::SyntaxError;

/// Parses MiniLang source into a [`Program`].
pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut functions = Vec::new();
    while parser.peek() != &Tok::Eof {
        functions.push(parser.function()?);
    }
    Ok(Program::from_functions(functions))
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(SyntaxError::new(self.span(), format!("expected {expected}, found {}", self.peek().describe())))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(q) if *q == k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(name) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            _ => self.error("identifier"),
        }
    }

    fn at_type(&self) -> bool {
        matches!(self.peek(), Tok::Kw("int") | Tok::Kw("bool") | Tok::Kw("void"))
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::Kw("int") => {
                self.bump();
                if self.eat_punct("[") {
                    self.expect_punct("]")?;
                    Ok(Type::IntArray)
                } else {
                    Ok(Type::Int)
                }
            }
            Tok::Kw("bool") => {
                self.bump();
                Ok(Type::Bool)
            }
            Tok::Kw("void") => {
                self.bump();
                Ok(Type::Void)
            }
            _ => self.error("type"),
        }
    }

    fn function(&mut self) -> PResult<Tree> {
        let span = self.span();
        let ret = self.ty()?;
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let ty = self.ty()?;
                let name = self.ident()?;
                params.push(Param { name, ty });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        let body_span = self.span();
        let body = Tree::new(NodeKind::Block, self.braced()?).with_span(body_span);
        Ok(Tree::new(NodeKind::FunctionDecl { name, ret, params }, vec![body]).with_span(span))
    }

    /// `{ stmt* }`, returning the statements.
    fn braced(&mut self) -> PResult<Vec<Tree>> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if self.peek() == &Tok::Eof {
                return self.error("`}`");
            }
            stmts.push(self.statement()?);
        }
        Ok(stmts)
    }

    fn statement(&mut self) -> PResult<Tree> {
        let span = self.span();
        let tree = match self.peek() {
            Tok::Punct("{") => Tree::new(NodeKind::Block, self.braced()?),
            Tok::Kw("if") => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = self.braced()?;
                let then_len = then.len();
                let mut children = vec![cond];
                children.extend(then);
                let has_else = self.eat_kw("else");
                if has_else {
                    children.extend(self.braced()?);
                }
                Tree::new(NodeKind::If { then_len, has_else }, children)
            }
            Tok::Kw("for") => {
                self.bump();
                self.expect_punct("(")?;
                self.expect_kw("int")?;
                let var = self.ident()?;
                self.expect_punct("=")?;
                let init = self.expr()?;
                self.expect_punct(";")?;
                let cond = self.expr()?;
                self.expect_punct(";")?;
                let update = self.expr()?;
                self.expect_punct(")")?;
                let mut children = vec![init, cond, update];
                children.extend(self.braced()?);
                Tree::new(NodeKind::For { var }, children)
            }
            Tok::Kw("while") => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let mut children = vec![cond];
                children.extend(self.braced()?);
                Tree::new(NodeKind::While, children)
            }
            Tok::Kw("return") => {
                self.bump();
                if self.eat_punct(";") {
                    Tree::leaf(NodeKind::Return)
                } else {
                    let value = self.expr()?;
                    self.expect_punct(";")?;
                    Tree::new(NodeKind::Return, vec![value])
                }
            }
            _ if self.at_type() => {
                let ty = self.ty()?;
                let name = self.ident()?;
                self.expect_punct("=")?;
                let init = self.expr()?;
                self.expect_punct(";")?;
                Tree::new(NodeKind::VarDecl { name, ty }, vec![init])
            }
            _ => {
                let target = self.expr()?;
                if self.eat_punct("=") {
                    let value = self.expr()?;
                    self.expect_punct(";")?;
                    Tree::new(NodeKind::Assign, vec![target, value])
                } else {
                    self.expect_punct(";")?;
                    Tree::new(NodeKind::ExprStmt, vec![target])
                }
            }
        };
        Ok(tree.with_span(span))
    }

    fn expr(&mut self) -> PResult<Tree> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else { return None };
        BinOp::ALL.iter().copied().find(|op| op.symbol() == *p)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Tree> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop().filter(|op| op.precedence() >= min_prec) {
            let span = self.span();
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let op_node = Tree::leaf(NodeKind::Operator(Operator::Binary(op))).with_span(span);
            let lhs_span = lhs.span;
            let mut node = Tree::new(NodeKind::Binary, vec![lhs, op_node, rhs]);
            node.span = lhs_span;
            lhs = node;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Tree> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Punct("!") => Some(UnOp::Not),
            Tok::Punct("-") => Some(UnOp::Neg),
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                let operand = self.unary()?;
                let op_node = Tree::leaf(NodeKind::Operator(Operator::Unary(op))).with_span(span);
                Ok(Tree::new(NodeKind::Unary, vec![op_node, operand]).with_span(span))
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Tree> {
        let span = self.span();
        let mut base = self.primary()?;
        loop {
            let op_span = self.span();
            if self.eat_punct("[") {
                let index = self.expr()?;
                self.expect_punct("]")?;
                base = Tree::new(NodeKind::Index, vec![base, index]).with_span(span);
            } else if self.eat_punct("++") {
                let op = Tree::leaf(NodeKind::Operator(Operator::Step(StepOp::Inc))).with_span(op_span);
                base = Tree::new(NodeKind::IncDec, vec![base, op]).with_span(span);
            } else if self.eat_punct("--") {
                let op = Tree::leaf(NodeKind::Operator(Operator::Step(StepOp::Dec))).with_span(op_span);
                base = Tree::new(NodeKind::IncDec, vec![base, op]).with_span(span);
            } else {
                return Ok(base);
            }
        }
    }

    fn primary(&mut self) -> PResult<Tree> {
        let span = self.span();
        let tree = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Tree::leaf(NodeKind::IntLiteral(v))
            }
            Tok::Kw("true") => {
                self.bump();
                Tree::leaf(NodeKind::BoolLiteral(true))
            }
            Tok::Kw("false") => {
                self.bump();
                Tree::leaf(NodeKind::BoolLiteral(false))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.eat_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat_punct(")") {
                                break;
                            }
                            self.expect_punct(",")?;
                        }
                    }
                    Tree::new(NodeKind::Call { name }, args)
                } else {
                    Tree::leaf(NodeKind::Identifier { name })
                }
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            _ => return self.error("expression"),
        };
        Ok(tree.with_span(span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::ast::{Category, NodeId};

    #[test]
    fn minimal_program() {
        let p = parse("void f(){}").unwrap();
        assert_eq!(p.function_count(), 1);
        assert_eq!(p.len(), 2);
        assert_eq!(p.kind(NodeId(1)), &NodeKind::Block);
        assert!(p.children(NodeId(1)).is_empty());
    }

    #[test]
    fn missing_expression_is_a_syntax_error() {
        let err = parse("void f(){ int x = ; }").unwrap_err();
        assert_eq!((err.line, err.column), (1, 19));
        assert!(err.message.contains("expected expression"), "{}", err.message);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("int f(int a, int b) { return a - b - 1 * 2 < 3 && true; }").unwrap();
        let ret = p.children(NodeId(1))[0];
        let and = p.children(ret)[0];
        assert_eq!(p.kind(p.children(and)[1]), &NodeKind::Operator(Operator::Binary(BinOp::And)));
        let lt = p.children(and)[0];
        let sub = p.children(lt)[0];
        // (a - b) - (1 * 2)
        assert_eq!(p.kind(p.children(sub)[1]), &NodeKind::Operator(Operator::Binary(BinOp::Sub)));
        assert_eq!(p.kind(p.children(sub)[0]), &NodeKind::Binary);
        assert_eq!(p.kind(p.children(sub)[2]), &NodeKind::Binary);
    }

    #[test]
    fn if_else_layout() {
        let p = parse("void f(int x) { if (x < 1) { x = 1; x = 2; } else { x = 3; } }").unwrap();
        let stmt = p.children(NodeId(1))[0];
        assert_eq!(p.kind(stmt), &NodeKind::If { then_len: 2, has_else: true });
        assert_eq!(p.children(stmt).len(), 4);
    }

    #[test]
    fn for_loop_children() {
        let p = parse("void f() { for (int i = 0; i < 3; i++) { } }").unwrap();
        let stmt = p.children(NodeId(1))[0];
        assert_eq!(p.kind(stmt), &NodeKind::For { var: "i".into() });
        let kinds: Vec<Category> = p.children(stmt).iter().map(|&c| p.kind(c).category()).collect();
        assert_eq!(kinds, vec![Category::Expression; 3]);
    }

    #[test]
    fn unterminated_block() {
        assert!(parse("void f() { x = 1;").is_err());
    }
}
