//! Python bindings (`offload_game`).

use offload_core::benchmark;
use offload_core::experiments::{self, ExperimentResult, ExperimentSettings, GeneratorSpec, OutputFormat};
use offload_core::game::{self, Game};
use offload_core::homogeneous;
use offload_core::mechanism::{self, ContentionMode, MechanismConfig};
use offload_core::model;
use offload_core::{DecisionProfile, Threshold};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    offload_game,
    OffloadError,
    PyException,
    "Error raised by the offloading engine."
);

fn err(e: offload_core::Error) -> PyErr {
    OffloadError::new_err(format!("{}: {e}", e.kind()))
}

fn json_err(e: serde_json::Error) -> PyErr {
    err(e.into())
}

fn profile(text: &str) -> PyResult<DecisionProfile> {
    text.parse().map_err(err)
}

/// Users sharing one wireless channel.
#[pyclass(module = "offload_game", frozen)]
struct Scenario {
    inner: offload_core::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: offload_core::Scenario::from_json(text).map_err(err)?,
        })
    }

    /// Random scenario; `spec` is an optional JSON generator config.
    #[staticmethod]
    #[pyo3(signature = (seed, users=None, spec=None))]
    fn generate(seed: u64, users: Option<usize>, spec: Option<&str>) -> PyResult<Self> {
        let mut g: GeneratorSpec = match spec {
            Some(text) => serde_json::from_str(text).map_err(json_err)?,
            None => GeneratorSpec::default(),
        };
        if let Some(n) = users {
            g.users = n;
        }
        g.seed = seed;
        Ok(Scenario {
            inner: experiments::generate_scenario(&g).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.inner.bandwidth()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(users={}, bandwidth={})",
            self.inner.len(),
            self.inner.bandwidth()
        )
    }

    /// Offloading threshold of user `n` in watts, or None if it never offloads.
    fn threshold(&self, n: usize) -> PyResult<Option<f64>> {
        Ok(match model::threshold(&self.inner, n).map_err(err)? {
            Threshold::NeverOffload => None,
            Threshold::Finite(l) => Some(l),
        })
    }

    fn interference(&self, profile_bits: &str, n: usize) -> PyResult<f64> {
        model::interference(&self.inner, &profile(profile_bits)?, n).map_err(err)
    }

    fn user_overhead(&self, profile_bits: &str, n: usize) -> PyResult<f64> {
        model::user_overhead(&self.inner, &profile(profile_bits)?, n).map_err(err)
    }

    fn system_cost(&self, profile_bits: &str) -> PyResult<f64> {
        model::system_cost(&self.inner, &profile(profile_bits)?).map_err(err)
    }

    /// True if offloading is a best response for user `n`.
    fn best_response(&self, profile_bits: &str, n: usize) -> PyResult<bool> {
        game::best_response(&self.inner, &profile(profile_bits)?, n).map_err(err)
    }

    /// The strictly improving move of user `n` (True = offload), or None.
    fn improvement(&self, profile_bits: &str, n: usize) -> PyResult<Option<bool>> {
        Ok(game::improvement_set(&self.inner, &profile(profile_bits)?, n)
            .map_err(err)?
            .target())
    }

    fn is_nash(&self, profile_bits: &str) -> PyResult<bool> {
        game::is_nash(&self.inner, &profile(profile_bits)?).map_err(err)
    }

    fn potential(&self, profile_bits: &str) -> PyResult<f64> {
        game::potential(&self.inner, &profile(profile_bits)?).map_err(err)
    }

    fn improvers(&self, profile_bits: &str) -> PyResult<Vec<usize>> {
        let a = profile(profile_bits)?;
        if a.len() != self.inner.len() {
            return Err(err(offload_core::Error::ProfileLength {
                got: a.len(),
                expected: self.inner.len(),
            }));
        }
        Ok(Game::new(&self.inner).improvers(a.bits()))
    }

    fn equilibria(&self) -> PyResult<Vec<String>> {
        Ok(game::enumerate_equilibria(&self.inner)
            .map_err(err)?
            .profiles()
            .iter()
            .map(|a| a.to_string())
            .collect())
    }

    /// `(profile, cost, method)` of the centralized optimum.
    fn optimum(&self) -> PyResult<(String, f64, String)> {
        let opt = benchmark::centralized_optimum(&self.inner).map_err(err)?;
        let method = match opt.method {
            benchmark::OptimumMethod::Exhaustive => "exhaustive",
            benchmark::OptimumMethod::BranchAndBound => "branch-and-bound",
        };
        Ok((opt.profile.to_string(), opt.cost, method.to_string()))
    }

    /// `(all_local, all_cloud)` system costs.
    fn baselines(&self) -> (f64, f64) {
        let b = benchmark::baselines(&self.inner);
        (b.all_local, b.all_cloud)
    }

    fn poa(&self) -> PyResult<f64> {
        benchmark::poa(&self.inner).map_err(err)
    }

    fn poa_bound(&self) -> f64 {
        benchmark::poa_bound(&self.inner)
    }

    fn homogeneous_equilibrium(&self) -> PyResult<String> {
        Ok(homogeneous::homogeneous_equilibrium(&self.inner)
            .map_err(err)?
            .to_string())
    }

    /// Runs the decentralized mechanism and returns a summary dict.
    #[pyo3(signature = (seed, quiet_slots=1, contention="uniform-backoff", max_slots=1_000_000))]
    fn run_mechanism<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        quiet_slots: u32,
        contention: &str,
        max_slots: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let contention = match contention {
            "uniform-backoff" => ContentionMode::UniformBackoff,
            "random-winner" => ContentionMode::RandomWinner,
            other => {
                return Err(err(offload_core::Error::Config(format!(
                    "unknown contention mode `{other}` (uniform-backoff | random-winner)"
                ))))
            }
        };
        let cfg = MechanismConfig {
            quiet_slots,
            contention,
            seed,
            max_slots,
        };
        let trace = mechanism::run_mechanism(&self.inner, &cfg).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("converged", trace.converged)?;
        d.set_item("final_profile", trace.final_profile.to_string())?;
        d.set_item("system_cost", trace.final_system_cost())?;
        d.set_item("potential", trace.final_potential())?;
        d.set_item("updates", trace.updates)?;
        d.set_item("messages", trace.messages.total)?;
        d.set_item("slots", trace.slots.len())?;
        let winners: Vec<Option<usize>> = trace.slots.iter().map(|r| r.winner).collect();
        d.set_item("winners", winners)?;
        let potentials: Vec<f64> = trace.slots.iter().map(|r| r.potential).collect();
        d.set_item("potentials", potentials)?;
        Ok(d)
    }
}

/// Beneficial cloud group for raw threshold ratios `L/K`.
#[pyfunction]
fn beneficial_group(ratios: Vec<f64>) -> PyResult<Vec<usize>> {
    let view = homogeneous::HomogeneousView::from_ratios(1.0, &ratios).map_err(err)?;
    Ok(homogeneous::beneficial_group(&view).map_err(err)?.members)
}

/// Runs an experiment and returns the result as JSON. `settings` is an
/// optional JSON settings document; `grid` overrides the sweep points.
#[pyfunction]
#[pyo3(signature = (kind, seed, settings=None, grid=None))]
fn run_experiment(kind: &str, seed: u64, settings: Option<&str>, grid: Option<Vec<f64>>) -> PyResult<String> {
    let settings: ExperimentSettings = match settings {
        Some(text) => serde_json::from_str(text).map_err(json_err)?,
        None => ExperimentSettings::default(),
    };
    let points = |default: &[f64]| grid.clone().unwrap_or_else(|| default.to_vec());
    let result = match kind {
        "convergence" => experiments::experiment_convergence(&settings, seed),
        "sweep-d" => experiments::experiment_sweep_d(&settings, &points(&[5e8, 1e9, 2e9, 4e9]), seed),
        "sweep-b" => experiments::experiment_sweep_b(&settings, &points(&[1e6, 3.36e6, 1e7]), seed),
        "scaling" => {
            let ns: Vec<usize> = points(&[2.0, 4.0, 6.0, 8.0]).iter().map(|&x| x as usize).collect();
            experiments::experiment_scaling(&settings, &ns, seed)
        }
        other => Err(offload_core::Error::Config(format!("unknown experiment `{other}`"))),
    }
    .map_err(err)?;
    serde_json::to_string(&result).map_err(json_err)
}

/// Writes CSV/SVG files for a result produced by `run_experiment`.
#[pyfunction]
#[pyo3(signature = (result, out_dir, formats=vec!["csv".to_string(), "svg".to_string()]))]
fn emit(result: &str, out_dir: &str, formats: Vec<String>) -> PyResult<Vec<String>> {
    let result: ExperimentResult = serde_json::from_str(result).map_err(json_err)?;
    let formats = formats
        .iter()
        .map(|f| serde_json::from_value::<OutputFormat>(serde_json::Value::String(f.clone())).map_err(json_err))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(experiments::emit(&result, std::path::Path::new(out_dir), &formats)
        .map_err(err)?
        .into_iter()
        .map(|p| p.display().to_string())
        .collect())
}

#[pymodule]
fn offload_game(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add("OffloadError", m.py().get_type::<OffloadError>())?;
    m.add_function(wrap_pyfunction!(beneficial_group, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    Ok(())
}
