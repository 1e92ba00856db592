//! Test case definitions and shared test-library plumbing.
//!
//! A test case is data plus four callables: setup, steps, validation, and
//! cleanup. Each phase receives the same [`PhaseContext`] (case data, an
//! application driver, a log sink) and reports success or a described
//! failure; the harness owns sequencing, crash containment, and making sure
//! cleanup always runs. Definitions are collected in a [`TestCaseRegistry`]
//! keyed by case id.
//!
//! Shared library methods take keyword arguments through [`MethodRegistry`]:
//! callers pass a name/value map, declared defaults fill the gaps, and
//! unknown keywords are rejected outright. Growing a method by adding a
//! defaulted keyword therefore never breaks an existing caller. Methods may
//! extend one another to share keyword declarations, but resolution chains
//! are capped at three links; deeper towers of indirection have no place in
//! test code.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::datacontainer::ParamMap;
use crate::drivers::{Action, DriverHandle, Mismatch};
use crate::logreport::{LogSink, SourceLocator};

#[derive(Debug, Error)]
pub enum TestlibError {
    #[error("test case \"{id}\" is already registered")]
    DuplicateCase { id: String },
    #[error("method \"{name}\" is already registered")]
    DuplicateMethod { name: String },
    #[error("no method \"{name}\" registered")]
    UnknownMethod { name: String },
    #[error("method \"{name}\" extends unknown method \"{parent}\"")]
    UnknownParent { name: String, parent: String },
    #[error("method \"{name}\" would make a resolution chain of {depth} links, over the cap of {MAX_CHAIN_LINKS}")]
    ChainTooDeep { name: String, depth: usize },
    #[error("method \"{method}\" does not accept keyword \"{keyword}\"")]
    UnknownKeyword { method: String, keyword: String },
    #[error("method \"{method}\" requires keyword \"{keyword}\"")]
    MissingKeyword { method: String, keyword: String },
}

/// Longest allowed method resolution chain, the method itself included.
pub const MAX_CHAIN_LINKS: usize = 3;

// ---------------------------------------------------------------------------
// Test case definitions

/// Everything a phase callable gets to work with.
pub struct PhaseContext {
    pub case_id: String,
    pub data: ParamMap,
    pub driver: DriverHandle,
    pub log: LogSink,
}

/// A described test failure raised by a phase. `new` captures the caller's
/// source position so `[FAILED]` log lines can point at the assertion.
#[derive(Debug, Clone)]
pub struct PhaseFailure {
    pub message: String,
    pub locator: Option<SourceLocator>,
}

impl PhaseFailure {
    #[track_caller]
    pub fn new(message: impl Into<String>) -> PhaseFailure {
        let caller = std::panic::Location::caller();
        PhaseFailure {
            message: message.into(),
            locator: Some(SourceLocator::new(caller.file(), caller.line())),
        }
    }

    pub fn with_locator(message: impl Into<String>, file: impl Into<String>, line: u32) -> Self {
        PhaseFailure {
            message: message.into(),
            locator: Some(SourceLocator::new(file, line)),
        }
    }

    pub fn without_locator(message: impl Into<String>) -> PhaseFailure {
        PhaseFailure {
            message: message.into(),
            locator: None,
        }
    }
}

pub type PhaseResult = Result<(), PhaseFailure>;

/// A phase callable. Phases run on a watchdog thread, so they must be
/// self-contained: everything they touch comes in through the context.
pub type PhaseFn = Arc<dyn Fn(&PhaseContext) -> PhaseResult + Send + Sync>;

/// The four fixed phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Setup,
    Steps,
    Validation,
    Cleanup,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Setup => "setup",
            Phase::Steps => "steps",
            Phase::Validation => "validation",
            Phase::Cleanup => "cleanup",
        })
    }
}

/// A test case: its id and all four phase callables. Phases default to
/// no-ops so a definition can declare only what it needs.
#[derive(Clone)]
pub struct TestCaseDefinition {
    case_id: String,
    setup: PhaseFn,
    steps: PhaseFn,
    validation: PhaseFn,
    cleanup: PhaseFn,
}

fn noop_phase() -> PhaseFn {
    Arc::new(|_| Ok(()))
}

impl TestCaseDefinition {
    pub fn new(case_id: impl Into<String>) -> TestCaseDefinition {
        TestCaseDefinition {
            case_id: case_id.into(),
            setup: noop_phase(),
            steps: noop_phase(),
            validation: noop_phase(),
            cleanup: noop_phase(),
        }
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn with_setup(
        mut self,
        f: impl Fn(&PhaseContext) -> PhaseResult + Send + Sync + 'static,
    ) -> Self {
        self.setup = Arc::new(f);
        self
    }

    pub fn with_steps(
        mut self,
        f: impl Fn(&PhaseContext) -> PhaseResult + Send + Sync + 'static,
    ) -> Self {
        self.steps = Arc::new(f);
        self
    }

    pub fn with_validation(
        mut self,
        f: impl Fn(&PhaseContext) -> PhaseResult + Send + Sync + 'static,
    ) -> Self {
        self.validation = Arc::new(f);
        self
    }

    pub fn with_cleanup(
        mut self,
        f: impl Fn(&PhaseContext) -> PhaseResult + Send + Sync + 'static,
    ) -> Self {
        self.cleanup = Arc::new(f);
        self
    }

    pub fn phase(&self, phase: Phase) -> &PhaseFn {
        match phase {
            Phase::Setup => &self.setup,
            Phase::Steps => &self.steps,
            Phase::Validation => &self.validation,
            Phase::Cleanup => &self.cleanup,
        }
    }
}

/// All registered case definitions, keyed by case id.
#[derive(Default)]
pub struct TestCaseRegistry {
    cases: BTreeMap<String, TestCaseDefinition>,
}

impl TestCaseRegistry {
    pub fn new() -> TestCaseRegistry {
        TestCaseRegistry::default()
    }

    pub fn register_case(&mut self, definition: TestCaseDefinition) -> Result<(), TestlibError> {
        let id = definition.case_id().to_string();
        if self.cases.contains_key(&id) {
            return Err(TestlibError::DuplicateCase { id });
        }
        self.cases.insert(id, definition);
        Ok(())
    }

    pub fn get(&self, case_id: &str) -> Option<&TestCaseDefinition> {
        self.cases.get(case_id)
    }

    pub fn case_ids(&self) -> Vec<&str> {
        self.cases.keys().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// The page the generic data-driven case drives. Kept to one well-known page
/// so containers stay purely about values.
pub const CONFIG_PAGE: &str = "config";

/// Top-level text parameters of a case, skipping `*_expected` overrides and
/// the text key. These are the keys the generic case configures and checks.
pub fn configurable_keys(data: &ParamMap) -> Vec<&str> {
    data.iter()
        .filter(|(k, v)| {
            !k.ends_with(crate::datacontainer::EXPECTED_SUFFIX)
                && k.as_str() != crate::datacontainer::TEXT_KEY
                && matches!(v, crate::datacontainer::DataValue::Text(_))
        })
        .map(|(k, _)| k.as_str())
        .collect()
}

/// The standard data-driven case: open the config page, set every text
/// parameter from the case data, dump the reported config back, and validate
/// it against the container (honoring `*_expected` overrides). The same
/// definition serves every case id; only the data varies.
pub fn data_driven_case(case_id: &str) -> TestCaseDefinition {
    fn describe(e: crate::drivers::DriverError) -> PhaseFailure {
        PhaseFailure::new(e.to_string())
    }

    TestCaseDefinition::new(case_id)
        .with_setup(|ctx| {
            ctx.driver.open_page(CONFIG_PAGE).map_err(describe)?;
            let _ = ctx
                .log
                .log(crate::logreport::LogLevel::Info, "Opened config page...");
            Ok(())
        })
        .with_steps(|ctx| {
            for key in configurable_keys(&ctx.data) {
                let value = ctx.data[key].as_text().expect("configurable keys are text");
                ctx.driver
                    .perform_action(Action::SetValue, key, Some(value))
                    .map_err(describe)?;
                let _ = ctx.log.log(
                    crate::logreport::LogLevel::Info,
                    &format!("Set {key} to \"{value}\"..."),
                );
            }
            Ok(())
        })
        .with_validation(|ctx| {
            let keys = configurable_keys(&ctx.data);
            let dump = crate::drivers::dump_config(ctx.driver.as_ref(), &keys);
            let mismatches = crate::drivers::validate_config(&dump, &ctx.data, &keys)
                .map_err(|e| PhaseFailure::new(e.to_string()))?;
            if mismatches.is_empty() {
                let _ = ctx.log.log(
                    crate::logreport::LogLevel::Info,
                    &format!("Validated {} parameter(s)...", keys.len()),
                );
                return Ok(());
            }
            let listed: Vec<String> = mismatches.iter().map(Mismatch::to_string).collect();
            Err(PhaseFailure::new(format!(
                "config mismatch: {}",
                listed.join("; ")
            )))
        })
        .with_cleanup(|ctx| {
            ctx.driver.reset();
            let _ = ctx
                .log
                .log(crate::logreport::LogLevel::Info, "Application state reset...");
            Ok(())
        })
}

// ---------------------------------------------------------------------------
// Keyword-argument methods

/// Keyword arguments: name to string value.
pub type ArgMap = BTreeMap<String, String>;

/// A declared keyword; `default: None` marks it required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub name: String,
    pub default: Option<String>,
}

impl Keyword {
    pub fn required(name: impl Into<String>) -> Keyword {
        Keyword {
            name: name.into(),
            default: None,
        }
    }

    pub fn optional(name: impl Into<String>, default: impl Into<String>) -> Keyword {
        Keyword {
            name: name.into(),
            default: Some(default.into()),
        }
    }
}

/// A method body. It receives the completed argument map: every declared
/// keyword present, defaults filled in.
pub type MethodFn = Arc<dyn Fn(&ArgMap) -> String + Send + Sync>;

struct MethodEntry {
    keywords: Vec<Keyword>,
    extends: Option<String>,
    body: MethodFn,
}

/// Named methods invokable with keyword arguments.
#[derive(Default)]
pub struct MethodRegistry {
    methods: BTreeMap<String, MethodEntry>,
}

impl MethodRegistry {
    pub fn new() -> MethodRegistry {
        MethodRegistry::default()
    }

    pub fn register_method(
        &mut self,
        name: impl Into<String>,
        keywords: Vec<Keyword>,
        body: impl Fn(&ArgMap) -> String + Send + Sync + 'static,
    ) -> Result<(), TestlibError> {
        self.register_entry(name.into(), None, keywords, Arc::new(body))
    }

    /// Registers a method that inherits the keyword declarations of
    /// `parent`. Its own declarations win on a name clash.
    pub fn register_method_extending(
        &mut self,
        name: impl Into<String>,
        parent: impl Into<String>,
        keywords: Vec<Keyword>,
        body: impl Fn(&ArgMap) -> String + Send + Sync + 'static,
    ) -> Result<(), TestlibError> {
        self.register_entry(name.into(), Some(parent.into()), keywords, Arc::new(body))
    }

    fn register_entry(
        &mut self,
        name: String,
        extends: Option<String>,
        keywords: Vec<Keyword>,
        body: MethodFn,
    ) -> Result<(), TestlibError> {
        if self.methods.contains_key(&name) {
            return Err(TestlibError::DuplicateMethod { name });
        }
        if let Some(parent) = &extends {
            let Some(_) = self.methods.get(parent) else {
                return Err(TestlibError::UnknownParent {
                    name,
                    parent: parent.clone(),
                });
            };
            let depth = 1 + self.chain_depth(parent);
            if depth > MAX_CHAIN_LINKS {
                return Err(TestlibError::ChainTooDeep { name, depth });
            }
        }
        self.methods.insert(
            name,
            MethodEntry {
                keywords,
                extends,
                body,
            },
        );
        Ok(())
    }

    fn chain_depth(&self, name: &str) -> usize {
        let mut depth = 0;
        let mut cursor = Some(name.to_string());
        while let Some(current) = cursor {
            depth += 1;
            cursor = self
                .methods
                .get(&current)
                .and_then(|entry| entry.extends.clone());
        }
        depth
    }

    /// Keywords visible on `name`: its own plus inherited ones, nearest
    /// declaration winning.
    fn effective_keywords(&self, name: &str) -> Vec<&Keyword> {
        let mut seen: Vec<&Keyword> = Vec::new();
        let mut cursor = Some(name);
        while let Some(current) = cursor {
            let entry = &self.methods[current];
            for kw in &entry.keywords {
                if !seen.iter().any(|k| k.name == kw.name) {
                    seen.push(kw);
                }
            }
            cursor = entry.extends.as_deref();
        }
        seen
    }

    /// Calls `name` with `args`: rejects unknown keywords, requires the
    /// required ones, fills declared defaults, and runs the body on the
    /// completed map.
    pub fn invoke_method(&self, name: &str, args: &ArgMap) -> Result<String, TestlibError> {
        if !self.methods.contains_key(name) {
            return Err(TestlibError::UnknownMethod {
                name: name.to_string(),
            });
        }
        let declared = self.effective_keywords(name);
        for key in args.keys() {
            if !declared.iter().any(|k| &k.name == key) {
                return Err(TestlibError::UnknownKeyword {
                    method: name.to_string(),
                    keyword: key.clone(),
                });
            }
        }
        let mut completed = args.clone();
        for kw in &declared {
            if completed.contains_key(&kw.name) {
                continue;
            }
            match &kw.default {
                Some(default) => {
                    completed.insert(kw.name.clone(), default.clone());
                }
                None => {
                    return Err(TestlibError::MissingKeyword {
                        method: name.to_string(),
                        keyword: kw.name.clone(),
                    });
                }
            }
        }
        Ok((self.methods[name].body)(&completed))
    }
}
