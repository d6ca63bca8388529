//! A DTD subset: `<!ELEMENT>` declarations with content models, an
//! optional `<!DOCTYPE root [...]>` wrapper. Attribute lists, entities,
//! notations and comments are skipped.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::HedgeAutomaton;
use crate::error::{Error, Result};
use crate::regex::Regex;
use crate::state::State;
use crate::tree::{is_token_char, Label};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContentModel {
    Empty,
    Any,
    Children(Regex<Label>),
}

#[derive(Clone, Debug)]
pub struct DtdSchema {
    pub root: Label,
    pub elements: BTreeMap<Label, ContentModel>,
}

impl DtdSchema {
    pub fn state_of(label: &Label) -> State {
        State::from(format!("q_{label}"))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DtdOptions {
    /// Reject mixed content instead of dropping `#PCDATA`.
    pub strict: bool,
}

pub fn parse_dtd(text: &str) -> Result<DtdSchema> {
    parse_dtd_with(text, DtdOptions::default()).map(|(s, _)| s)
}

/// Parses a DTD, returning warnings for stripped `#PCDATA`.
pub fn parse_dtd_with(text: &str, options: DtdOptions) -> Result<(DtdSchema, Vec<String>)> {
    let mut p = Scanner { text, pos: 0 };
    let mut root = None;
    let mut order = Vec::new();
    let mut elements = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut in_doctype = false;
    loop {
        p.skip_ws();
        if p.eof() {
            break;
        }
        if in_doctype && p.eat("]") {
            p.skip_ws();
            p.expect(">")?;
            in_doctype = false;
        } else if p.eat("<!--") {
            match text[p.pos..].find("-->") {
                Some(i) => p.pos += i + 3,
                None => return Err(p.error("unterminated comment")),
            }
        } else if p.eat("<?") {
            match text[p.pos..].find("?>") {
                Some(i) => p.pos += i + 2,
                None => return Err(p.error("unterminated processing instruction")),
            }
        } else if p.eat("<!DOCTYPE") {
            p.skip_ws();
            root = Some(p.name()?);
            p.skip_ws();
            p.expect("[")?;
            in_doctype = true;
        } else if p.eat("<!ELEMENT") {
            p.skip_ws();
            let at = p.pos;
            let name = p.name()?;
            p.skip_ws();
            let model = p.content_model(options, &name, &mut warnings)?;
            p.skip_ws();
            p.expect(">")?;
            if elements.insert(name.clone(), (model, at)).is_some() {
                return Err(Error::DuplicateDeclaration(name.to_string()));
            }
            order.push(name);
        } else if p.eat("<!ATTLIST") || p.eat("<!ENTITY") || p.eat("<!NOTATION") {
            p.skip_declaration()?;
        } else {
            return Err(p.error("expected a markup declaration"));
        }
    }
    if in_doctype {
        return Err(p.error("unterminated DOCTYPE"));
    }
    let root = match root.or_else(|| order.first().cloned()) {
        Some(r) => r,
        None => return Err(Error::syntax(text, text.len(), "no element declarations")),
    };
    if !elements.contains_key(&root) {
        return Err(Error::UndeclaredElement(root.to_string()));
    }
    for (model, _) in elements.values() {
        if let ContentModel::Children(re) = model {
            if let Some(undeclared) = re.symbols().into_iter().find(|l| !elements.contains_key(*l)) {
                return Err(Error::UndeclaredElement(undeclared.to_string()));
            }
        }
    }
    let elements = elements.into_iter().map(|(k, (m, _))| (k, m)).collect();
    Ok((DtdSchema { root, elements }, warnings))
}

/// One state `q_e` per element `e`, one rule `e(R_e) → q_e`, and `q_root`
/// as the only final state.
pub fn compile_dtd(schema: &DtdSchema) -> Result<HedgeAutomaton> {
    if !schema.elements.contains_key(&schema.root) {
        return Err(Error::UndeclaredElement(schema.root.to_string()));
    }
    let all: BTreeSet<State> = schema.elements.keys().map(DtdSchema::state_of).collect();
    let mut out = HedgeAutomaton::new(schema.root.as_str());
    for q in &all {
        out.add_state(q.clone());
    }
    out.add_final(DtdSchema::state_of(&schema.root));
    for (label, model) in &schema.elements {
        let regex = match model {
            ContentModel::Empty => Regex::Epsilon,
            ContentModel::Any => Regex::Star(Box::new(Regex::Alt(all.iter().cloned().map(Regex::Symbol).collect()))),
            ContentModel::Children(re) => {
                if let Some(undeclared) = re.symbols().into_iter().find(|l| !schema.elements.contains_key(*l)) {
                    return Err(Error::UndeclaredElement(undeclared.to_string()));
                }
                re.map(&DtdSchema::state_of)
            }
        };
        let mut nfa = regex.to_nfa();
        nfa.extend_alphabet(all.iter().cloned());
        out.add_rule(label.clone(), DtdSchema::state_of(label), nfa);
    }
    for label in schema.elements.keys() {
        out.add_label(label.clone());
    }
    Ok(out)
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl Scanner<'_> {
    fn eof(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.text, self.pos, message)
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    fn name(&mut self) -> Result<Label> {
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| is_token_char(*c))
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        let at = self.pos;
        let word = &self.text[at..at + len];
        self.pos += len;
        Label::new(word).map_err(|_| Error::syntax(self.text, at, format!("invalid element name `{word}`")))
    }

    // Skips to the closing `>`, stepping over quoted strings.
    fn skip_declaration(&mut self) -> Result<()> {
        let mut quote = None;
        for (i, c) in self.rest().char_indices() {
            match (quote, c) {
                (Some(q), c) if c == q => quote = None,
                (Some(_), _) => {}
                (None, '"' | '\'') => quote = Some(c),
                (None, '>') => {
                    self.pos += i + 1;
                    return Ok(());
                }
                _ => {}
            }
        }
        Err(self.error("unterminated declaration"))
    }

    fn content_model(&mut self, options: DtdOptions, element: &Label, warnings: &mut Vec<String>) -> Result<ContentModel> {
        if self.eat("EMPTY") {
            return Ok(ContentModel::Empty);
        }
        if self.eat("ANY") {
            return Ok(ContentModel::Any);
        }
        if !self.rest().starts_with('(') {
            return Err(self.error("expected EMPTY, ANY or a content model"));
        }
        let at = self.pos;
        let mut pcdata = false;
        let re = self.postfix(&mut pcdata)?;
        if pcdata {
            if options.strict {
                return Err(Error::syntax(self.text, at, format!("mixed content in element `{element}`")));
            }
            warnings.push(format!("{}: #PCDATA dropped from element `{element}`", crate::Location::of_offset(self.text, at)));
        }
        Ok(ContentModel::Children(re))
    }

    // alt := seq ('|' seq)* ; seq := postfix (',' postfix)*
    fn alt(&mut self, pcdata: &mut bool) -> Result<Regex<Label>> {
        let mut items = vec![self.seq(pcdata)?];
        loop {
            self.skip_ws();
            if !self.eat("|") {
                break;
            }
            items.push(self.seq(pcdata)?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Alt(items) })
    }

    fn seq(&mut self, pcdata: &mut bool) -> Result<Regex<Label>> {
        let mut items = vec![self.postfix(pcdata)?];
        loop {
            self.skip_ws();
            if !self.eat(",") {
                break;
            }
            items.push(self.postfix(pcdata)?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Concat(items) })
    }

    fn postfix(&mut self, pcdata: &mut bool) -> Result<Regex<Label>> {
        self.skip_ws();
        let mut atom = if self.eat("(") {
            let inner = self.alt(pcdata)?;
            self.skip_ws();
            self.expect(")")?;
            inner
        } else if self.eat("#PCDATA") {
            *pcdata = true;
            Regex::Epsilon
        } else {
            Regex::Symbol(self.name()?)
        };
        loop {
            if self.eat("*") {
                atom = Regex::Star(Box::new(atom));
            } else if self.eat("+") {
                atom = Regex::Plus(Box::new(atom));
            } else if self.eat("?") {
                atom = Regex::Optional(Box::new(atom));
            } else {
                return Ok(atom);
            }
        }
    }
}
