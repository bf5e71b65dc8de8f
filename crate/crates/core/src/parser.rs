//! Recursive-descent parser for the C subset, plus pointer enumeration.
//!
//! The supported subset: function definitions; declarations of scalar,
//! pointer and array locals; assignments (compound forms desugared);
//! `for`/`while`/`if-else`; calls as opaque expressions; array subscripts;
//! unary deref and address-of; `return`. Files are assumed pre-expanded —
//! no preprocessor directives. Casts are accepted and dropped as no-ops;
//! `sizeof(..)` lexes as a single Constant.

use crate::ast::{AstNode, AstTree, NodeKind, PointerDecl, SourceSpan};
use crate::error::SyntaxError;
use crate::lexer::{tokenize, Token, TokenKind};

const BUILTIN_TYPES: [&str; 9] = [
    "int", "char", "float", "double", "void", "long", "short", "unsigned", "signed",
];

/// Parse one source file into per-function syntax trees.
///
/// Top-level declarations and prototypes are accepted and skipped; only
/// function definitions produce trees.
pub fn parse_translation_unit(source_text: &str, file: &str) -> Result<Vec<AstTree>, SyntaxError> {
    let tokens = tokenize(source_text, file)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        file,
    };
    parser.translation_unit()
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    file: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + off)
    }

    fn peek_is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn advance(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (u32, u32) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + t.text.len() as u32))
                .unwrap_or((1, 1)),
        }
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError::new(self.file, line, col, message)
    }

    fn expect(&mut self, text: &str) -> Result<&'a Token, SyntaxError> {
        match self.peek() {
            Some(t) if t.is(text) => Ok(self.advance().unwrap()),
            Some(t) => Err(self.err(format!("expected '{text}', found '{}'", t.text))),
            None => Err(self.err(format!("expected '{text}', found end of input"))),
        }
    }

    fn span_of(&self, tok: &Token) -> SourceSpan {
        SourceSpan {
            file: self.file.to_string(),
            line_start: tok.line,
            line_end: tok.line,
            col_start: tok.col,
            col_end: tok.col + tok.text.len() as u32 - 1,
        }
    }

    fn translation_unit(&mut self) -> Result<Vec<AstTree>, SyntaxError> {
        let mut trees = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.is(";") {
                self.advance();
                continue;
            }
            if let Some(tree) = self.external()? {
                trees.push(tree);
            }
        }
        Ok(trees)
    }

    /// One top-level item; `None` for globals and prototypes.
    fn external(&mut self) -> Result<Option<AstTree>, SyntaxError> {
        let ret_type = self
            .type_spec()
            .ok_or_else(|| self.err("expected a type at top level"))?;
        let mut stars = String::new();
        while self.peek_is("*") {
            self.advance();
            stars.push('*');
        }
        let name_tok = match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => self.advance().unwrap(),
            _ => return Err(self.err("expected a name after type")),
        };
        if self.peek_is("(") {
            let ret = if stars.is_empty() {
                ret_type
            } else {
                format!("{ret_type} {stars}")
            };
            return self.function_def(ret, name_tok);
        }
        // global declaration: skip to ';'
        while let Some(t) = self.peek() {
            if t.is(";") {
                self.advance();
                return Ok(None);
            }
            self.advance();
        }
        Err(self.err("unterminated top-level declaration"))
    }

    fn function_def(
        &mut self,
        ret_type: String,
        name_tok: &Token,
    ) -> Result<Option<AstTree>, SyntaxError> {
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.peek_is(")") {
            if self.peek().is_some_and(|t| t.is_ident("void")) && self.peek_at(1).is_some_and(|t| t.is(")")) {
                self.advance();
            } else {
                loop {
                    if self.peek_is("...") {
                        self.advance();
                    } else {
                        params.push(self.param()?);
                    }
                    if self.peek_is(",") {
                        self.advance();
                        continue;
                    }
                    break;
                }
            }
        }
        self.expect(")")?;
        if self.peek_is(";") {
            // prototype
            self.advance();
            return Ok(None);
        }
        let body_start = self.pos;
        let body = self.compound()?;
        let token_count = self.pos - body_start;
        let mut span = self.span_of(name_tok).merge(&body.span);
        for p in &params {
            span = span.merge(&p.span);
        }
        let mut root = AstNode::with_text(
            NodeKind::FunctionDef,
            span,
            format!("{}|{}", name_tok.text, ret_type),
        );
        root.children = params;
        root.children.push(body);
        Ok(Some(AstTree {
            function_name: name_tok.text.clone(),
            root,
            token_count,
        }))
    }

    fn param(&mut self) -> Result<AstNode, SyntaxError> {
        let start = self.here();
        let base = self
            .type_spec()
            .ok_or_else(|| self.err("expected a parameter type"))?;
        let mut ty = base;
        while self.peek_is("*") {
            self.advance();
            ty.push_str(" *");
        }
        let name_tok = match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => self.advance().unwrap(),
            _ => return Err(self.err("expected a parameter name")),
        };
        while self.peek_is("[") {
            self.advance();
            if !self.peek_is("]") {
                self.expr()?;
            }
            self.expect("]")?;
            ty.push_str(" []");
        }
        let mut span = self.span_of(name_tok);
        span.line_start = start.0.min(span.line_start);
        if span.line_start == start.0 {
            span.col_start = span.col_start.min(start.1);
        }
        Ok(AstNode::with_text(
            NodeKind::Param,
            span,
            format!("{}|{}", name_tok.text, ty),
        ))
    }

    /// Consume a type specifier, `None` when the cursor is not at one.
    fn type_spec(&mut self) -> Option<String> {
        while self.peek().is_some_and(|t| t.is_ident("const") || t.is_ident("static")) {
            self.advance();
        }
        let tok = self.peek()?;
        if tok.kind != TokenKind::Ident {
            return None;
        }
        if tok.is_ident("struct") {
            self.advance();
            let name = self.advance()?;
            return Some(format!("struct {}", name.text));
        }
        if BUILTIN_TYPES.contains(&tok.text.as_str()) {
            let mut words = vec![self.advance().unwrap().text.clone()];
            while self
                .peek()
                .is_some_and(|t| t.kind == TokenKind::Ident && BUILTIN_TYPES.contains(&t.text.as_str()))
            {
                words.push(self.advance().unwrap().text.clone());
            }
            return Some(words.join(" "));
        }
        // user-named type (int32, lextree_t, ..)
        self.advance();
        Some(tok.text.clone())
    }

    fn compound(&mut self) -> Result<AstNode, SyntaxError> {
        let open = self.expect("{")?.clone();
        let mut node = AstNode::new(NodeKind::Compound, self.span_of(&open));
        while let Some(tok) = self.peek() {
            if tok.is("}") {
                let close = self.advance().unwrap();
                node.span = node.span.merge(&self.span_of(close));
                return Ok(node);
            }
            self.statement_into(&mut node.children)?;
        }
        Err(self.err("unterminated compound statement"))
    }

    /// Parse one statement; declarations may push several Decl nodes.
    fn statement_into(&mut self, out: &mut Vec<AstNode>) -> Result<(), SyntaxError> {
        let tok = self.peek().ok_or_else(|| self.err("expected a statement"))?;
        if tok.is(";") {
            self.advance();
            return Ok(());
        }
        if tok.is("{") {
            out.push(self.compound()?);
            return Ok(());
        }
        if tok.is_ident("for") {
            out.push(self.for_stmt()?);
            return Ok(());
        }
        if tok.is_ident("while") {
            out.push(self.while_stmt()?);
            return Ok(());
        }
        if tok.is_ident("if") {
            out.push(self.if_stmt()?);
            return Ok(());
        }
        if tok.is_ident("return") {
            let kw = self.advance().unwrap();
            let mut node = AstNode::new(NodeKind::Return, self.span_of(kw));
            if !self.peek_is(";") {
                let e = self.expr()?;
                node.span = node.span.merge(&e.span);
                node.children.push(e);
            }
            self.expect(";")?;
            out.push(node);
            return Ok(());
        }
        if self.at_declaration() {
            self.decl_stmt_into(out)?;
            return Ok(());
        }
        let e = self.expr()?;
        self.expect(";")?;
        out.push(e);
        Ok(())
    }

    /// Heuristic: `T x`, `T *x`, `struct T ..` and builtin types start a
    /// declaration; everything else is an expression statement.
    fn at_declaration(&self) -> bool {
        let Some(tok) = self.peek() else { return false };
        if tok.kind != TokenKind::Ident {
            return false;
        }
        if tok.is_ident("struct") || BUILTIN_TYPES.contains(&tok.text.as_str()) {
            return true;
        }
        let mut k = 1;
        while self.peek_at(k).is_some_and(|t| t.is("*")) {
            k += 1;
        }
        if k > 1 {
            // IDENT '*'+ IDENT then a declarator continuation
            return self.peek_at(k).is_some_and(|t| t.kind == TokenKind::Ident)
                && self
                    .peek_at(k + 1)
                    .is_some_and(|t| t.is(";") || t.is(",") || t.is("=") || t.is("["));
        }
        self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn decl_stmt_into(&mut self, out: &mut Vec<AstNode>) -> Result<(), SyntaxError> {
        let start_tok = self.peek().unwrap().clone();
        let base = self
            .type_spec()
            .ok_or_else(|| self.err("expected a type in declaration"))?;
        loop {
            let mut ty = base.clone();
            while self.peek_is("*") {
                self.advance();
                ty.push_str(" *");
            }
            let name_tok = match self.peek() {
                Some(t) if t.kind == TokenKind::Ident => self.advance().unwrap().clone(),
                _ => return Err(self.err("expected a declarator name")),
            };
            let mut dims = Vec::new();
            while self.peek_is("[") {
                self.advance();
                if !self.peek_is("]") {
                    dims.push(self.expr()?);
                } else {
                    ty.push_str(" []");
                }
                self.expect("]")?;
            }
            let init = if self.peek_is("=") {
                self.advance();
                Some(self.expr()?)
            } else {
                None
            };
            let mut span = self.span_of(&start_tok).merge(&self.span_of(&name_tok));
            for d in &dims {
                span = span.merge(&d.span);
            }
            if let Some(i) = &init {
                span = span.merge(&i.span);
            }
            let mut node = AstNode::with_text(
                NodeKind::Decl,
                span,
                format!(
                    "{}|{}|{}|{}",
                    name_tok.text,
                    ty,
                    dims.len(),
                    usize::from(init.is_some())
                ),
            );
            node.children = dims;
            if let Some(i) = init {
                node.children.push(i);
            }
            out.push(node);
            if self.peek_is(",") {
                self.advance();
                continue;
            }
            self.expect(";")?;
            return Ok(());
        }
    }

    fn for_stmt(&mut self) -> Result<AstNode, SyntaxError> {
        let kw = self.advance().unwrap();
        let kw_span = self.span_of(kw);
        self.expect("(")?;
        let mut inits = Vec::new();
        if !self.peek_is(";") {
            loop {
                inits.push(self.expr()?);
                if self.peek_is(",") {
                    self.advance();
                    continue;
                }
                break;
            }
        }
        self.expect(";")?;
        let cond = if self.peek_is(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let mut incrs = Vec::new();
        if !self.peek_is(")") {
            loop {
                incrs.push(self.expr()?);
                if self.peek_is(",") {
                    self.advance();
                    continue;
                }
                break;
            }
        }
        self.expect(")")?;
        let body = self.loop_body()?;
        let mut span = kw_span.merge(&body.span);
        for n in inits.iter().chain(&incrs).chain(cond.as_ref()) {
            span = span.merge(&n.span);
        }
        let mut node = AstNode::with_text(
            NodeKind::For,
            span,
            format!("{};{};{}", inits.len(), usize::from(cond.is_some()), incrs.len()),
        );
        node.children = inits;
        if let Some(c) = cond {
            node.children.push(c);
        }
        node.children.extend(incrs);
        node.children.push(body);
        Ok(node)
    }

    fn while_stmt(&mut self) -> Result<AstNode, SyntaxError> {
        let kw = self.advance().unwrap();
        let kw_span = self.span_of(kw);
        self.expect("(")?;
        let cond = self.expr()?;
        self.expect(")")?;
        let body = self.loop_body()?;
        let span = kw_span.merge(&cond.span).merge(&body.span);
        let mut node = AstNode::new(NodeKind::While, span);
        node.children = vec![cond, body];
        Ok(node)
    }

    fn if_stmt(&mut self) -> Result<AstNode, SyntaxError> {
        let kw = self.advance().unwrap();
        let kw_span = self.span_of(kw);
        self.expect("(")?;
        let cond = self.expr()?;
        self.expect(")")?;
        let then = self.loop_body()?;
        let mut span = kw_span.merge(&cond.span).merge(&then.span);
        let mut node = AstNode::new(NodeKind::If, span.clone());
        node.children = vec![cond, then];
        if self.peek().is_some_and(|t| t.is_ident("else")) {
            self.advance();
            let els = self.loop_body()?;
            span = span.merge(&els.span);
            node.children.push(els);
            node.span = span;
        }
        Ok(node)
    }

    /// Body of a control construct: braced compound or a single statement.
    fn loop_body(&mut self) -> Result<AstNode, SyntaxError> {
        if self.peek_is("{") {
            return self.compound();
        }
        let mut tmp = Vec::new();
        self.statement_into(&mut tmp)?;
        match tmp.len() {
            1 => Ok(tmp.pop().unwrap()),
            0 => Ok(AstNode::new(NodeKind::Compound, {
                let (l, c) = self.here();
                SourceSpan::point(self.file, l, c)
            })),
            _ => {
                // multi-declarator declaration as an unbraced body
                let mut span = tmp[0].span.clone();
                for n in &tmp {
                    span = span.merge(&n.span);
                }
                let mut node = AstNode::new(NodeKind::Compound, span);
                node.children = tmp;
                Ok(node)
            }
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<AstNode, SyntaxError> {
        self.assignment()
    }

    fn assignment(&mut self) -> Result<AstNode, SyntaxError> {
        let lhs = self.binary(0)?;
        let Some(tok) = self.peek() else { return Ok(lhs) };
        let compound_op = match tok.text.as_str() {
            "=" => Some(None),
            "+=" => Some(Some("+")),
            "-=" => Some(Some("-")),
            "*=" => Some(Some("*")),
            "/=" => Some(Some("/")),
            "%=" => Some(Some("%")),
            _ => None,
        };
        let Some(op) = compound_op else { return Ok(lhs) };
        self.advance();
        let rhs = self.assignment()?;
        let span = lhs.span.merge(&rhs.span);
        let rhs = match op {
            None => rhs,
            Some(bin) => {
                // a += b  desugars to  a = a + b
                let mut node =
                    AstNode::with_text(NodeKind::BinaryOp, lhs.span.merge(&rhs.span), bin);
                node.children = vec![lhs.clone(), rhs];
                node
            }
        };
        let mut node = AstNode::with_text(NodeKind::Assignment, span, "=");
        node.children = vec![lhs, rhs];
        Ok(node)
    }

    fn binary(&mut self, level: usize) -> Result<AstNode, SyntaxError> {
        const LEVELS: [&[&str]; 6] = [
            &["||"],
            &["&&"],
            &["==", "!="],
            &["<", ">", "<=", ">="],
            &["+", "-"],
            &["*", "/", "%"],
        ];
        if level >= LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(tok) = self.peek() {
            let Some(op) = LEVELS[level].iter().find(|o| tok.is(o)) else {
                break;
            };
            self.advance();
            let rhs = self.binary(level + 1)?;
            let span = lhs.span.merge(&rhs.span);
            let mut node = AstNode::with_text(NodeKind::BinaryOp, span, *op);
            node.children = vec![lhs, rhs];
            lhs = node;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<AstNode, SyntaxError> {
        let tok = self.peek().ok_or_else(|| self.err("expected an expression"))?;
        if tok.is("*") {
            let star = self.advance().unwrap();
            let operand = self.unary()?;
            let span = self.span_of(star).merge(&operand.span);
            let mut node = AstNode::new(NodeKind::Deref, span);
            node.children = vec![operand];
            return Ok(node);
        }
        for op in ["&", "-", "+", "!", "~", "++", "--"] {
            if tok.is(op) {
                let t = self.advance().unwrap();
                let operand = self.unary()?;
                let span = self.span_of(t).merge(&operand.span);
                let mut node = AstNode::with_text(NodeKind::UnaryOp, span, op);
                node.children = vec![operand];
                return Ok(node);
            }
        }
        if tok.is_ident("sizeof") {
            let kw = self.advance().unwrap();
            self.expect("(")?;
            let mut depth = 1usize;
            let mut inner = String::new();
            let mut end_span = self.span_of(kw);
            while depth > 0 {
                let t = self
                    .advance()
                    .ok_or_else(|| self.err("unterminated sizeof"))?;
                if t.is("(") {
                    depth += 1;
                } else if t.is(")") {
                    depth -= 1;
                    if depth == 0 {
                        end_span = self.span_of(t);
                        break;
                    }
                }
                if depth > 0 {
                    if !inner.is_empty() {
                        inner.push(' ');
                    }
                    inner.push_str(&t.text);
                }
            }
            let span = self.span_of(kw).merge(&end_span);
            return Ok(AstNode::with_text(
                NodeKind::Constant,
                span,
                format!("sizeof({inner})"),
            ));
        }
        if tok.is("(") {
            if let Some(after) = self.cast_end() {
                self.pos = after;
                return self.unary();
            }
            self.advance();
            let e = self.expr()?;
            self.expect(")")?;
            return self.postfix_tail(e);
        }
        self.postfix()
    }

    /// Position just past `)` when the cursor sits on a no-op cast.
    fn cast_end(&self) -> Option<usize> {
        let mut k = 1;
        let mut words = 0usize;
        let mut all_builtin = true;
        if self.peek_at(k).is_some_and(|t| t.is_ident("struct")) {
            k += 1;
            all_builtin = false;
        }
        while let Some(t) = self.peek_at(k) {
            if t.kind == TokenKind::Ident && !t.is_ident("sizeof") {
                if !BUILTIN_TYPES.contains(&t.text.as_str()) && words > 0 {
                    break;
                }
                all_builtin &= BUILTIN_TYPES.contains(&t.text.as_str());
                words += 1;
                k += 1;
            } else {
                break;
            }
        }
        if words == 0 {
            return None;
        }
        let mut stars = 0usize;
        while self.peek_at(k).is_some_and(|t| t.is("*")) {
            stars += 1;
            k += 1;
        }
        if !self.peek_at(k).is_some_and(|t| t.is(")")) {
            return None;
        }
        if stars == 0 && !all_builtin {
            return None;
        }
        // the cast must be followed by the start of an operand
        let next = self.peek_at(k + 1)?;
        let starts_operand = next.kind != TokenKind::Punct
            || next.is("(")
            || next.is("*")
            || next.is("&")
            || next.is("-")
            || next.is("+")
            || next.is("!");
        starts_operand.then_some(self.pos + k + 1)
    }

    fn postfix(&mut self) -> Result<AstNode, SyntaxError> {
        let e = self.primary()?;
        self.postfix_tail(e)
    }

    fn postfix_tail(&mut self, mut e: AstNode) -> Result<AstNode, SyntaxError> {
        loop {
            let Some(tok) = self.peek() else { return Ok(e) };
            if tok.is("[") {
                self.advance();
                let index = self.expr()?;
                let close = self.expect("]")?;
                let span = e.span.merge(&self.span_of(close));
                let mut node = AstNode::new(NodeKind::ArrayRef, span);
                node.children = vec![e, index];
                e = node;
            } else if tok.is("(") {
                self.advance();
                let mut args = Vec::new();
                if !self.peek_is(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.peek_is(",") {
                            self.advance();
                            continue;
                        }
                        break;
                    }
                }
                let close = self.expect(")")?;
                let span = e.span.merge(&self.span_of(close));
                let mut node = AstNode::new(NodeKind::Call, span);
                node.children = vec![e];
                node.children.extend(args);
                e = node;
            } else if tok.is("->") || tok.is(".") {
                let acc = self.advance().unwrap().text.clone();
                let member = match self.peek() {
                    Some(t) if t.kind == TokenKind::Ident => self.advance().unwrap(),
                    _ => return Err(self.err("expected a member name")),
                };
                let mspan = self.span_of(member);
                let span = e.span.merge(&mspan);
                let mut node = AstNode::with_text(NodeKind::StructRef, span, acc);
                node.children = vec![e, AstNode::with_text(NodeKind::Id, mspan, &member.text)];
                e = node;
            } else if tok.is("++") || tok.is("--") {
                let t = self.advance().unwrap();
                let span = e.span.merge(&self.span_of(t));
                let mut node =
                    AstNode::with_text(NodeKind::UnaryOp, span, format!("p{}", t.text));
                node.children = vec![e];
                e = node;
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<AstNode, SyntaxError> {
        let tok = self.peek().ok_or_else(|| self.err("expected an expression"))?;
        match tok.kind {
            TokenKind::Ident => {
                let t = self.advance().unwrap();
                Ok(AstNode::with_text(NodeKind::Id, self.span_of(t), &t.text))
            }
            TokenKind::IntLit | TokenKind::FloatLit | TokenKind::StrLit | TokenKind::CharLit => {
                let t = self.advance().unwrap();
                Ok(AstNode::with_text(
                    NodeKind::Constant,
                    self.span_of(t),
                    &t.text,
                ))
            }
            TokenKind::Punct => Err(self.err(format!("unexpected '{}'", tok.text))),
        }
    }
}

/// Collect every declared pointer or array, plus struct-member chains that
/// are dereferenced inside the function. Order is first occurrence.
pub fn enumerate_pointers(ast: &AstTree) -> Vec<PointerDecl> {
    let mut out: Vec<PointerDecl> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push = |name: String, base_type: String, is_parameter: bool, span: SourceSpan,
                    out: &mut Vec<PointerDecl>| {
        if seen.insert(name.clone()) {
            out.push(PointerDecl {
                name,
                declared_in: ast.function_name.clone(),
                base_type,
                is_parameter,
                span,
            });
        }
    };

    for p in ast.params() {
        let (name, ty) = p.declarator();
        if ty.contains('*') || ty.contains("[]") {
            let base = ty.replace('*', "").replace("[]", "").trim().to_string();
            push(name.to_string(), base, true, p.span.clone(), &mut out);
        }
    }
    ast.root.visit(&mut |node| match node.kind {
        NodeKind::Decl => {
            let (name, ty) = node.declarator();
            let (ndims, _) = node.decl_shape();
            if ty.contains('*') || ty.contains("[]") || ndims > 0 {
                let base = ty.replace('*', "").replace("[]", "").trim().to_string();
                push(name.to_string(), base, false, node.span.clone(), &mut out);
            }
        }
        NodeKind::ArrayRef | NodeKind::Deref => {
            if let Some(base) = deref_base_chain(node) {
                if base.contains("->") || base.contains('.') {
                    push(base, String::new(), false, node.children[0].span.clone(), &mut out);
                }
            }
        }
        _ => {}
    });
    out
}

/// Root identifier of a dereference spine: `p` for `p[i][j]`, `*(p+k)` and
/// `p->q[i]` (returns `p->q`). `None` when the base is not an identifier.
pub fn deref_base_chain(node: &AstNode) -> Option<String> {
    match node.kind {
        NodeKind::ArrayRef => {
            let base = &node.children[0];
            base.chain_ident().or_else(|| deref_base_chain(base))
        }
        NodeKind::Deref => {
            let operand = &node.children[0];
            operand.chain_ident().or_else(|| pointer_part(operand))
        }
        _ => None,
    }
}

/// Pointer side of an additive expression: `p` in `p + i` or `i + p`.
fn pointer_part(expr: &AstNode) -> Option<String> {
    if expr.kind == NodeKind::BinaryOp && (expr.text == "+" || expr.text == "-") {
        return expr.children[0]
            .chain_ident()
            .or_else(|| expr.children[1].chain_ident())
            .or_else(|| deref_base_chain(&expr.children[0]));
    }
    deref_base_chain(expr)
}
