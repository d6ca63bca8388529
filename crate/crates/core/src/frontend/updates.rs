//! Update scripts: one primitive per line, `#` comments.
//!
//! ```text
//! ren a -> b
//! ins_first a <- p
//! del a
//! ```

use crate::automaton::HedgeAutomaton;
use crate::error::{Error, Result};
use crate::frontend::lex::Cursor;
use crate::rewrite::{UpdateKind, UpdateRule, UpdateScript};
use crate::state::State;
use crate::tree::Label;

pub fn parse_updates(text: &str, types: &HedgeAutomaton) -> Result<UpdateScript> {
    let mut c = Cursor::new(text)?;
    let mut rules = Vec::new();
    c.skip_newlines();
    while c.peek().is_some() {
        let at = c.offset();
        let keyword = c.word("an update primitive")?;
        let kind = UpdateKind::from_keyword(&keyword)
            .ok_or_else(|| Error::syntax(text, at, format!("unknown primitive `{keyword}`")))?;
        let target = label(&mut c)?;
        let rule = match kind {
            UpdateKind::Ren => {
                if c.at_punct("<-") {
                    return Err(c.error("ren takes a new label (`-> b`), not a type state"));
                }
                c.expect_punct("->")?;
                UpdateRule::ren(target, label(&mut c)?)
            }
            UpdateKind::Del => {
                if !c.at_line_end() {
                    return Err(c.error("del takes no operand"));
                }
                UpdateRule::del(target)
            }
            _ => {
                if c.at_punct("->") {
                    return Err(c.error(format!("{kind} takes a type state (`<- p`), not a new label")));
                }
                c.expect_punct("<-")?;
                let p = State::from(c.word("type state")?.as_str());
                if !types.states().contains(&p) {
                    return Err(Error::UnknownTypeState(p));
                }
                UpdateRule::with_type(kind, target, p)
            }
        };
        rules.push(rule);
        c.end_line()?;
        c.skip_newlines();
    }
    UpdateScript::new(types.clone(), rules)
}

fn label(c: &mut Cursor) -> Result<Label> {
    let at = c.offset();
    let w = c.word("label")?;
    Label::new(&w).map_err(|_| Error::syntax(c.text, at, format!("invalid label `{w}`")))
}
