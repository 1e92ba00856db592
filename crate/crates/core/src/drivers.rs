//! Pluggable application drivers.
//!
//! Test cases talk to the application under test through [`AppDriver`], a
//! deliberately small surface: open a page, act on an element, read a state
//! value, reset. Swapping the application means swapping the driver behind
//! [`DriverHandle`]; the cases and the harness do not change.
//!
//! [`MockWebApp`] is the in-process driver used by the harness's own test
//! runs: a set of pages with named elements and a key/value config store. It
//! records every call, honors a configurable page-load delay, and can inject
//! a fault (failing or hanging on a chosen target), which is how crash and
//! timeout handling get exercised without a real browser.
//!
//! [`dump_config`] and [`validate_config`] close the loop from the data
//! container: configure the application from case data, dump what it now
//! reports, and compare against the expected values.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use thiserror::Error;

use crate::datacontainer::{expected_value, ContainerError, ParamMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error("no page \"{page}\" in the application")]
    UnknownPage { page: String },
    #[error("no page is open")]
    NoPageOpen,
    #[error("page \"{page}\" has no element \"{element}\"")]
    UnknownElement { page: String, element: String },
    #[error("action on \"{target}\" requires a value")]
    MissingValue { target: String },
    #[error("injected fault on \"{target}\"")]
    InjectedFault { target: String },
}

/// What to do to an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Click,
    SetValue,
}

/// One recorded driver call, in the order it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriverCall {
    OpenPage {
        page: String,
    },
    Perform {
        action: Action,
        target: String,
        value: Option<String>,
    },
    ReadState {
        key: String,
    },
    Reset,
}

/// The application seam. One handle is owned by one case execution at a
/// time; distinct handles are independent applications.
pub trait AppDriver: Send + Sync {
    fn open_page(&self, page_id: &str) -> Result<(), DriverError>;
    fn perform_action(
        &self,
        action: Action,
        target: &str,
        value: Option<&str>,
    ) -> Result<(), DriverError>;
    fn read_state(&self, key: &str) -> Option<String>;
    fn reset(&self);
}

pub type DriverHandle = Arc<dyn AppDriver>;

/// How an injected fault fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    /// The call returns [`DriverError::InjectedFault`].
    FailOnAction,
    /// The call never returns; only a harness timeout gets past it.
    HangOnAction,
}

/// A fault armed on a page or element name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub target: String,
    pub kind: FaultKind,
}

#[derive(Default)]
struct MockState {
    pages: BTreeMap<String, BTreeSet<String>>,
    current_page: Option<String>,
    config: BTreeMap<String, String>,
    action_log: Vec<DriverCall>,
    fault: Option<Fault>,
}

/// In-process stand-in for a web application under test.
#[derive(Default)]
pub struct MockWebApp {
    state: Mutex<MockState>,
    page_load_delay: Duration,
}

fn lock_state(m: &Mutex<MockState>) -> MutexGuard<'_, MockState> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl MockWebApp {
    pub fn new() -> MockWebApp {
        MockWebApp::default()
    }

    /// Adds a page with its element names.
    pub fn with_page<I, S>(self, page: &str, elements: I) -> MockWebApp
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        lock_state(&self.state).pages.insert(
            page.to_string(),
            elements.into_iter().map(Into::into).collect(),
        );
        self
    }

    /// Simulated page-load time applied by [`AppDriver::open_page`].
    pub fn with_page_load_delay(mut self, delay: Duration) -> MockWebApp {
        self.page_load_delay = delay;
        self
    }

    /// Arms (or clears) the fault. It fires whenever a page open or an
    /// element action references the fault's target.
    pub fn inject_fault(&self, fault: Option<Fault>) {
        lock_state(&self.state).fault = fault;
    }

    /// Every call made so far, oldest first.
    pub fn action_log(&self) -> Vec<DriverCall> {
        lock_state(&self.state).action_log.clone()
    }

    /// Observable application state: the open page and the config store.
    /// This is what [`AppDriver::reset`] restores.
    pub fn observed_state(&self) -> (Option<String>, BTreeMap<String, String>) {
        let state = lock_state(&self.state);
        (state.current_page.clone(), state.config.clone())
    }

    pub fn into_handle(self) -> DriverHandle {
        Arc::new(self)
    }

    /// Checks the armed fault for `target`. Must be called with the state
    /// lock released: a hang would otherwise wedge every other handle.
    fn trip_fault(&self, fault: Option<Fault>, target: &str) -> Result<(), DriverError> {
        let Some(fault) = fault else { return Ok(()) };
        if fault.target != target {
            return Ok(());
        }
        match fault.kind {
            FaultKind::FailOnAction => Err(DriverError::InjectedFault {
                target: target.to_string(),
            }),
            FaultKind::HangOnAction => loop {
                std::thread::sleep(Duration::from_secs(3600));
            },
        }
    }
}

impl AppDriver for MockWebApp {
    fn open_page(&self, page_id: &str) -> Result<(), DriverError> {
        let fault = {
            let mut state = lock_state(&self.state);
            state.action_log.push(DriverCall::OpenPage {
                page: page_id.to_string(),
            });
            if !state.pages.contains_key(page_id) {
                return Err(DriverError::UnknownPage {
                    page: page_id.to_string(),
                });
            }
            state.fault.clone()
        };
        self.trip_fault(fault, page_id)?;
        if !self.page_load_delay.is_zero() {
            std::thread::sleep(self.page_load_delay);
        }
        lock_state(&self.state).current_page = Some(page_id.to_string());
        Ok(())
    }

    fn perform_action(
        &self,
        action: Action,
        target: &str,
        value: Option<&str>,
    ) -> Result<(), DriverError> {
        let fault = {
            let mut state = lock_state(&self.state);
            state.action_log.push(DriverCall::Perform {
                action,
                target: target.to_string(),
                value: value.map(str::to_string),
            });
            let Some(page) = state.current_page.clone() else {
                return Err(DriverError::NoPageOpen);
            };
            if !state.pages[&page].contains(target) {
                return Err(DriverError::UnknownElement {
                    page,
                    element: target.to_string(),
                });
            }
            state.fault.clone()
        };
        self.trip_fault(fault, target)?;
        match action {
            Action::Click => Ok(()),
            Action::SetValue => {
                let Some(value) = value else {
                    return Err(DriverError::MissingValue {
                        target: target.to_string(),
                    });
                };
                lock_state(&self.state)
                    .config
                    .insert(target.to_string(), value.to_string());
                Ok(())
            }
        }
    }

    fn read_state(&self, key: &str) -> Option<String> {
        let mut state = lock_state(&self.state);
        state.action_log.push(DriverCall::ReadState {
            key: key.to_string(),
        });
        state.config.get(key).cloned()
    }

    fn reset(&self) {
        let mut state = lock_state(&self.state);
        state.action_log.push(DriverCall::Reset);
        state.current_page = None;
        state.config.clear();
    }
}

/// An ordered `key=value` snapshot of the application's reported config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigDump {
    pub entries: Vec<(String, String)>,
}

impl ConfigDump {
    /// The dumped value for `key`, empty when the application had none.
    pub fn value(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// One `key=value` line per entry, in request order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Reads each requested key from the application. Keys the application does
/// not know still get a line, with an empty value; a repeated key keeps its
/// first occurrence.
pub fn dump_config(driver: &dyn AppDriver, keys: &[&str]) -> ConfigDump {
    let mut entries: Vec<(String, String)> = Vec::new();
    for &key in keys {
        if entries.iter().any(|(k, _)| k == key) {
            continue;
        }
        let value = driver.read_state(key).unwrap_or_default();
        entries.push((key.to_string(), value));
    }
    ConfigDump { entries }
}

/// One validation difference: what the container expected vs what the
/// application reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub key: String,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: expected \"{}\", actual \"{}\"",
            self.key, self.expected, self.actual
        )
    }
}

/// Compares a config dump against case data for each key. The expected side
/// comes from [`expected_value`], so `*_expected` overrides apply. A key
/// missing from the case data is an error, not a mismatch: the test data is
/// wrong, not the application.
pub fn validate_config(
    dump: &ConfigDump,
    data: &ParamMap,
    keys: &[&str],
) -> Result<Vec<Mismatch>, ContainerError> {
    let mut mismatches = Vec::new();
    for &key in keys {
        let expectation = expected_value(data, key)?;
        let actual = dump.value(key).unwrap_or_default();
        if actual != expectation.expected {
            mismatches.push(Mismatch {
                key: key.to_string(),
                expected: expectation.expected,
                actual: actual.to_string(),
            });
        }
    }
    Ok(mismatches)
}
