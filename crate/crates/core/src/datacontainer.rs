//! XML-backed test data.
//!
//! Test inputs live in one XML container per area: a `<tcs>` root whose
//! `<tc name="...">` children each hold the parameters for one case. Parsing
//! promotes the `name` attribute to the case key and folds everything else
//! into a nested map, so a test case asks for its data by id and reads plain
//! key/value pairs. Keeping the values in data rather than in scripts is what
//! lets one script serve many cases.
//!
//! Folding rules: attributes and child elements both become keys; the text of
//! an element becomes its `_text` key; entries repeating the same name
//! collect into an ordered list. Nesting beyond three levels under a `<tc>`
//! still parses but is reported as a lint warning, since flat containers stay
//! reviewable.
//!
//! A parameter `freq` may carry a sibling `freq_expected` entry for when the
//! application is expected to report a different rendering of the configured
//! value; [`expected_value`] resolves which string a validator should demand.

use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use thiserror::Error;

/// Key under which an element's own text content is stored.
pub const TEXT_KEY: &str = "_text";

/// Suffix marking the expected-value override for a sibling parameter.
pub const EXPECTED_SUFFIX: &str = "_expected";

/// Nesting depth under `<tc>` beyond which a lint warning is raised.
pub const MAX_CLEAN_DEPTH: usize = 3;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("container XML at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error("container root element must be <tcs>, found <{found}>")]
    Root { found: String },
    #[error("container XML at byte {position}: expected <tc> under <tcs>, found <{found}>")]
    NotATestCase { position: u64, found: String },
    #[error("container has content outside the <tcs> root")]
    OutsideRoot,
    #[error("<tc> at byte {position} is missing the name attribute")]
    MissingName { position: u64 },
    #[error("duplicate test case \"{id}\" in container")]
    DuplicateCase { id: String },
    #[error("no test case \"{id}\" in container")]
    UnknownCase { id: String },
    #[error("no parameter \"{parameter}\" in case data")]
    MissingParameter { parameter: String },
    #[error("parameter \"{parameter}\" is not a plain text value")]
    NotText { parameter: String },
    #[error("override \"{key}\" is not a plain text value")]
    OverrideNotText { key: String },
}

/// A parsed parameter value: flat text, a nested map, or an ordered list
/// collected from same-named siblings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataValue {
    Text(String),
    Map(ParamMap),
    List(Vec<DataValue>),
}

impl DataValue {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            DataValue::Text(t) => Some(t),
            _ => None,
        }
    }
}

/// Parameter name to value, for one test case.
pub type ParamMap = BTreeMap<String, DataValue>;

/// Every case in a container, keyed by case id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestDataMap {
    pub cases: BTreeMap<String, ParamMap>,
}

/// Parse result: the data plus any lint warnings (deep nesting).
#[derive(Debug, Clone)]
pub struct ContainerParse {
    pub data: TestDataMap,
    pub warnings: Vec<String>,
}

/// An open element while parsing: entries seen so far plus its text.
struct Frame {
    name: String,
    opened_at: u64,
    case_id: Option<String>,
    map: ParamMap,
    text: String,
}

/// Inserts `value` under `key`, turning repeats into an ordered list.
fn insert_entry(map: &mut ParamMap, key: String, value: DataValue) {
    match map.remove(&key) {
        None => {
            map.insert(key, value);
        }
        Some(DataValue::List(mut items)) => {
            items.push(value);
            map.insert(key, DataValue::List(items));
        }
        Some(existing) => {
            map.insert(key, DataValue::List(vec![existing, value]));
        }
    }
}

/// Parses a test data container from XML text.
pub fn parse_container(xml: &str) -> Result<ContainerParse, ContainerError> {
    let mut reader = quick_xml::Reader::from_str(xml);
    let mut cases: BTreeMap<String, ParamMap> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut root_closed = false;

    fn xml_err(position: u64, e: impl std::fmt::Display) -> ContainerError {
        ContainerError::Xml {
            position,
            message: e.to_string(),
        }
    }

    // Opens an element: validates its place in the tree and collects its
    // attributes. The <tc> name attribute is promoted, everything else is an
    // ordinary entry. Attribute duplicates are rejected by the XML layer.
    fn open_frame(
        start: &BytesStart<'_>,
        stack: &[Frame],
        root_closed: bool,
        position: u64,
        warnings: &mut Vec<String>,
    ) -> Result<Frame, ContainerError> {
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        match stack.len() {
            0 => {
                if root_closed {
                    return Err(ContainerError::OutsideRoot);
                }
                if name != "tcs" {
                    return Err(ContainerError::Root { found: name });
                }
            }
            1 => {
                if name != "tc" {
                    return Err(ContainerError::NotATestCase {
                        position,
                        found: name,
                    });
                }
            }
            depth => {
                // Depth below the owning <tc>: its direct children sit at 1.
                let below_tc = depth - 1;
                if below_tc > MAX_CLEAN_DEPTH {
                    warnings.push(format!(
                        "element <{name}> is nested {below_tc} levels below its <tc>; \
                         containers are easiest to review within {MAX_CLEAN_DEPTH}"
                    ));
                }
            }
        }
        let mut frame = Frame {
            name,
            opened_at: position,
            case_id: None,
            map: ParamMap::new(),
            text: String::new(),
        };
        let is_tc = stack.len() == 1;
        for attr in start.attributes() {
            let attr = attr.map_err(|e| xml_err(position, e))?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|e| xml_err(position, e))?
                .into_owned();
            if is_tc && key == "name" {
                frame.case_id = Some(value);
            } else {
                insert_entry(&mut frame.map, key, DataValue::Text(value));
            }
        }
        Ok(frame)
    }

    // Closes the top frame, folding it into its parent (or the case map).
    fn close_frame(
        mut frame: Frame,
        stack: &mut Vec<Frame>,
        cases: &mut BTreeMap<String, ParamMap>,
        root_closed: &mut bool,
    ) -> Result<(), ContainerError> {
        let text = frame.text.trim();
        if !text.is_empty() {
            insert_entry(
                &mut frame.map,
                TEXT_KEY.to_string(),
                DataValue::Text(text.to_string()),
            );
        }
        match stack.len() {
            0 => {
                *root_closed = true;
            }
            1 => {
                let id = frame.case_id.ok_or(ContainerError::MissingName {
                    position: frame.opened_at,
                })?;
                if cases.contains_key(&id) {
                    return Err(ContainerError::DuplicateCase { id });
                }
                cases.insert(id, frame.map);
            }
            _ => {
                let parent = stack.last_mut().expect("non-empty stack");
                insert_entry(&mut parent.map, frame.name, DataValue::Map(frame.map));
            }
        }
        Ok(())
    }

    loop {
        let position = reader.buffer_position();
        let event = reader
            .read_event()
            .map_err(|e| xml_err(reader.buffer_position(), e))?;
        match event {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Start(start) => {
                let frame = open_frame(&start, &stack, root_closed, position, &mut warnings)?;
                stack.push(frame);
            }
            Event::Empty(start) => {
                let frame = open_frame(&start, &stack, root_closed, position, &mut warnings)?;
                close_frame(frame, &mut stack, &mut cases, &mut root_closed)?;
            }
            Event::End(_) => {
                // Name mismatches are caught by the XML layer before we get here.
                let frame = stack.pop().ok_or(ContainerError::OutsideRoot)?;
                close_frame(frame, &mut stack, &mut cases, &mut root_closed)?;
            }
            Event::Text(text) => {
                let chunk = text.unescape().map_err(|e| xml_err(position, e))?;
                match stack.last_mut() {
                    Some(frame) => frame.text.push_str(&chunk),
                    None => {
                        if !chunk.trim().is_empty() {
                            return Err(ContainerError::OutsideRoot);
                        }
                    }
                }
            }
            Event::CData(data) => match stack.last_mut() {
                Some(frame) => frame
                    .text
                    .push_str(&String::from_utf8_lossy(data.as_ref())),
                None => return Err(ContainerError::OutsideRoot),
            },
            Event::Eof => break,
        }
    }

    if !stack.is_empty() {
        return Err(ContainerError::Xml {
            position: reader.buffer_position(),
            message: format!("unexpected end of file, {} element(s) still open", stack.len()),
        });
    }
    if !root_closed {
        return Err(ContainerError::Xml {
            position: reader.buffer_position(),
            message: "no <tcs> root element found".into(),
        });
    }

    Ok(ContainerParse {
        data: TestDataMap { cases },
        warnings,
    })
}

/// The parameter map for one case.
pub fn lookup_case_data<'a>(
    data: &'a TestDataMap,
    case_id: &str,
) -> Result<&'a ParamMap, ContainerError> {
    data.cases
        .get(case_id)
        .ok_or_else(|| ContainerError::UnknownCase {
            id: case_id.to_string(),
        })
}

/// A parameter's configured value and the value a validator should expect
/// the application to report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedValue {
    pub parameter: String,
    pub configured: String,
    pub expected: String,
}

/// Resolves the value to validate for `parameter`: the `<parameter>_expected`
/// sibling when present, otherwise the configured value itself. The
/// configured parameter must exist even when an override does.
pub fn expected_value(map: &ParamMap, parameter: &str) -> Result<ExpectedValue, ContainerError> {
    let configured = match map.get(parameter) {
        None => {
            return Err(ContainerError::MissingParameter {
                parameter: parameter.to_string(),
            })
        }
        Some(DataValue::Text(t)) => t.clone(),
        Some(_) => {
            return Err(ContainerError::NotText {
                parameter: parameter.to_string(),
            })
        }
    };
    let override_key = format!("{parameter}{EXPECTED_SUFFIX}");
    let expected = match map.get(&override_key) {
        None => configured.clone(),
        Some(DataValue::Text(t)) => t.clone(),
        Some(_) => {
            return Err(ContainerError::OverrideNotText { key: override_key });
        }
    };
    Ok(ExpectedValue {
        parameter: parameter.to_string(),
        configured,
        expected,
    })
}
