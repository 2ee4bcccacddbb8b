//! C ABI for `mmnet`.
//!
//! Networks and codes are opaque handles created and destroyed through this
//! API. Every function returns an [`MmnetStatus`]; on failure a message is
//! available from [`mmnet_last_error_message`] on the same thread until the
//! next failing call. Node labels are 1-based, as in network files; cuts are
//! bitmasks with bit 0 for node 1.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mmnet::code::{
    exact_error_probability, generate_random_code, monte_carlo_error, repetition_code, Code, CodeError, DecoderKind,
};
use mmnet::converse::{single_letter_certificate, ConverseError};
use mmnet::network::schema::parse_network;
use mmnet::network::{Cut, NetworkSpec};
use mmnet::prob::{renyi_divergence, Axis, JointPmf, ProbError};
use mmnet::regions::{link_capacities, membership_report, MembershipOptions, Region, RegionError, Verdict};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    BudgetExhausted = 5,
    Panic = 6,
}

/// Region selector for [`mmnet_region_membership`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmnetRegion {
    Out = 0,
    OutStar = 1,
    /// Inner region at the uniform input.
    In = 2,
    /// Cut-set region at the uniform input.
    CutSet = 3,
    Prime = 4,
}

/// Membership verdict.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmnetVerdict {
    Member = 0,
    NonMember = 1,
    Boundary = 2,
}

/// Opaque network handle.
pub struct MmnetNetwork(NetworkSpec);

/// Opaque code handle.
pub struct MmnetCode(Code);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MmnetStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(MmnetStatus::InvalidArgument, msg.into())
    }
}

fn code_budget(e: &CodeError) -> bool {
    matches!(e, CodeError::BudgetExhausted { .. } | CodeError::Prob(ProbError::TooLarge { .. }))
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        let status = if code_budget(&e) { MmnetStatus::BudgetExhausted } else { MmnetStatus::InvalidArgument };
        Failure(status, e.to_string())
    }
}

impl From<ConverseError> for Failure {
    fn from(e: ConverseError) -> Self {
        let budget = match &e {
            ConverseError::BudgetExhausted { .. } | ConverseError::Prob(ProbError::TooLarge { .. }) => true,
            ConverseError::Code(c) => code_budget(c),
            _ => false,
        };
        let status = if budget { MmnetStatus::BudgetExhausted } else { MmnetStatus::InvalidArgument };
        Failure(status, e.to_string())
    }
}

impl From<RegionError> for Failure {
    fn from(e: RegionError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<ProbError> for Failure {
    fn from(e: ProbError) -> Self {
        Failure::invalid(e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).expect("interior nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

/// Runs `f`, converting failures and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MmnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmnetStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MmnetStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(MmnetStatus::NullPointer, "null pointer argument".into())
}

/// # Safety
/// `p` is null or valid for reads of `T`.
unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null());
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `s` is null or a nul-terminated string.
unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(MmnetStatus::InvalidUtf8, e.to_string()))
}

/// # Safety
/// `p` is null only when `len` is 0; otherwise valid for `len` reads.
unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn node(spec: &NetworkSpec, label: usize) -> Result<usize, Failure> {
    if label == 0 || label > spec.node_count() {
        return Err(Failure::invalid(format!("node {label} outside 1..={}", spec.node_count())));
    }
    Ok(label - 1)
}

fn cut(spec: &NetworkSpec, bits: u32) -> Result<Cut, Failure> {
    let c = Cut::from_bitmask(bits);
    spec.check_cut(c).map_err(|e| Failure::invalid(e.to_string()))?;
    Ok(c)
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mmnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a network from JSON text.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_network_from_json(json: *const c_char, out: *mut *mut MmnetNetwork) -> MmnetStatus {
    guard(|| {
        let spec = parse_network(text(json)?).map_err(|e| Failure(MmnetStatus::ParseError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(MmnetNetwork(spec))))
    })
}

/// Loads a bundled network by name (`bsc2`, `bec2`, `line3`,
/// `line3_feedback`, `erasure_relay3`).
///
/// # Safety
/// `name` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_network_from_fixture(name: *const c_char, out: *mut *mut MmnetNetwork) -> MmnetStatus {
    guard(|| {
        let name = text(name)?;
        let spec = mmnet::fixtures::load(name).ok_or_else(|| Failure::invalid(format!("unknown fixture `{name}`")))?;
        write(out, Box::into_raw(Box::new(MmnetNetwork(spec))))
    })
}

/// Releases a network; null is ignored.
///
/// # Safety
/// `network` is null or came from this API and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn mmnet_network_free(network: *mut MmnetNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// # Safety
/// `network` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_network_node_count(network: *const MmnetNetwork, out: *mut usize) -> MmnetStatus {
    guard(|| write(out, borrow(network)?.0.node_count()))
}

/// Capacity in bits of the link `from → to` of an independent-link network.
///
/// # Safety
/// `network` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_link_capacity(
    network: *const MmnetNetwork,
    from: usize,
    to: usize,
    out: *mut f64,
) -> MmnetStatus {
    guard(|| {
        let spec = &borrow(network)?.0;
        let (i, j) = (node(spec, from)?, node(spec, to)?);
        let caps = link_capacities(spec)?;
        let link = caps
            .links
            .iter()
            .find(|l| l.from == i && l.to == j)
            .ok_or_else(|| Failure::invalid(format!("no link {from} -> {to}")))?;
        write(out, link.capacity)
    })
}

/// Membership of `rates` (one per node) in `region`.
///
/// # Safety
/// `network` is a live handle; `rates` is valid for `len` reads; `out` is
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_region_membership(
    network: *const MmnetNetwork,
    rates: *const f64,
    len: usize,
    region: MmnetRegion,
    out: *mut MmnetVerdict,
) -> MmnetStatus {
    guard(|| {
        let spec = &borrow(network)?.0;
        let rates = slice(rates, len)?;
        let region = match region {
            MmnetRegion::Out => Region::Out,
            MmnetRegion::OutStar => Region::OutStar,
            MmnetRegion::In => Region::In(spec.uniform_input()),
            MmnetRegion::CutSet => Region::CutSet(spec.uniform_input()),
            MmnetRegion::Prime => Region::Prime,
        };
        let report = membership_report(spec, rates, &region, &MembershipOptions::default())?;
        write(
            out,
            match report.verdict {
                Verdict::Member => MmnetVerdict::Member,
                Verdict::NonMember => MmnetVerdict::NonMember,
                Verdict::Boundary => MmnetVerdict::Boundary,
            },
        )
    })
}

/// Draws a random code with ML decoding. `rates` has one entry per node.
///
/// # Safety
/// `network` is a live handle; `rates` is valid for `len` reads; `out` is
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_code_random(
    network: *const MmnetNetwork,
    rates: *const f64,
    len: usize,
    n: usize,
    seed: u64,
    out: *mut *mut MmnetCode,
) -> MmnetStatus {
    guard(|| {
        let spec = &borrow(network)?.0;
        let code = generate_random_code(spec, slice(rates, len)?, n, seed, DecoderKind::Ml)?;
        write(out, Box::into_raw(Box::new(MmnetCode(code))))
    })
}

/// Repetition code: `n / copies` message bits, each sent `copies` times.
///
/// # Safety
/// `network` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_code_repetition(
    network: *const MmnetNetwork,
    n: usize,
    copies: usize,
    out: *mut *mut MmnetCode,
) -> MmnetStatus {
    guard(|| {
        let code = repetition_code(&borrow(network)?.0, n, copies)?;
        write(out, Box::into_raw(Box::new(MmnetCode(code))))
    })
}

/// Releases a code; null is ignored.
///
/// # Safety
/// `code` is null or came from this API and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn mmnet_code_free(code: *mut MmnetCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Exact average error probability, enumerating at most `budget` trajectories.
///
/// # Safety
/// Handles are live; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_code_exact_error(
    network: *const MmnetNetwork,
    code: *const MmnetCode,
    budget: usize,
    out: *mut f64,
) -> MmnetStatus {
    guard(|| write(out, exact_error_probability(&borrow(network)?.0, &borrow(code)?.0, budget)?))
}

/// Monte Carlo error estimate with a 95% confidence half-width.
///
/// # Safety
/// Handles are live; `point` and `half_width` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_code_monte_carlo_error(
    network: *const MmnetNetwork,
    code: *const MmnetCode,
    trials: u64,
    seed: u64,
    point: *mut f64,
    half_width: *mut f64,
) -> MmnetStatus {
    guard(|| {
        let e = monte_carlo_error(&borrow(network)?.0, &borrow(code)?.0, trials, seed)?;
        write(point, e.point)?;
        write(half_width, e.half_width)
    })
}

/// Evaluates the converse chain of `code` across `cut` towards destination
/// `d` at order `lambda > 1` with error bound `eps_bar`. Writes whether
/// every step held and the Rényi Fano term in bits.
///
/// # Safety
/// Handles are live; `passed` and `lhs_bits` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_certificate(
    network: *const MmnetNetwork,
    code: *const MmnetCode,
    cut_bits: u32,
    d: usize,
    lambda: f64,
    eps_bar: f64,
    budget: usize,
    passed: *mut bool,
    lhs_bits: *mut f64,
) -> MmnetStatus {
    guard(|| {
        let spec = &borrow(network)?.0;
        let code = &borrow(code)?.0;
        let c = single_letter_certificate(spec, code, cut(spec, cut_bits)?, node(spec, d)?, lambda, eps_bar, budget)?;
        write(passed, c.passed)?;
        write(lhs_bits, c.lhs_bits)
    })
}

/// `D_λ(p‖q)` in bits for two pmfs of length `len`, `λ ≥ 1`.
///
/// # Safety
/// `p` and `q` are valid for `len` reads; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mmnet_renyi_divergence(
    p: *const f64,
    q: *const f64,
    len: usize,
    lambda: f64,
    out: *mut f64,
) -> MmnetStatus {
    guard(|| {
        let axes = vec![Axis::new("X", len)];
        let p = JointPmf::new(axes.clone(), slice(p, len)?.to_vec())?;
        let q = JointPmf::new(axes, slice(q, len)?.to_vec())?;
        write(out, renyi_divergence(&p, &q, lambda)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(mmnet_last_error_message()).to_string_lossy().into_owned() }
    }

    fn fixture(name: &str) -> *mut MmnetNetwork {
        let name = CString::new(name).unwrap();
        let mut net = ptr::null_mut();
        assert_eq!(unsafe { mmnet_network_from_fixture(name.as_ptr(), &mut net) }, MmnetStatus::Ok);
        net
    }

    #[test]
    fn capacity_of_bsc_link() {
        let net = fixture("line3");
        let mut c = 0.0;
        assert_eq!(unsafe { mmnet_link_capacity(net, 1, 2, &mut c) }, MmnetStatus::Ok);
        assert!((c - 0.531004406410719).abs() < 1e-9);
        assert_eq!(unsafe { mmnet_link_capacity(net, 1, 3, &mut c) }, MmnetStatus::InvalidArgument);
        assert!(last_error().contains("no link"));
        unsafe { mmnet_network_free(net) };
    }

    #[test]
    fn repetition_error_and_certificate() {
        let net = fixture("bec2");
        let mut code = ptr::null_mut();
        assert_eq!(unsafe { mmnet_code_repetition(net, 12, 4, &mut code) }, MmnetStatus::Ok);
        let mut err = 0.0;
        assert_eq!(unsafe { mmnet_code_exact_error(net, code, 1_000_000, &mut err) }, MmnetStatus::Ok);
        assert!((err - (1.0 - (1.0 - 0.0625f64).powi(3))).abs() < 1e-9);
        unsafe { mmnet_code_free(code) };

        let rates = [0.5, 0.0];
        assert_eq!(unsafe { mmnet_code_random(net, rates.as_ptr(), 2, 2, 3, &mut code) }, MmnetStatus::Ok);
        assert_eq!(unsafe { mmnet_code_exact_error(net, code, 1_000_000, &mut err) }, MmnetStatus::Ok);
        let (mut passed, mut lhs) = (false, 0.0);
        let status = unsafe { mmnet_certificate(net, code, 1, 2, 2.0, err, 1_000_000, &mut passed, &mut lhs) };
        assert_eq!(status, MmnetStatus::Ok);
        assert!(passed);
        let status = unsafe { mmnet_certificate(net, code, 1, 2, 2.0, err, 1, &mut passed, &mut lhs) };
        assert_eq!(status, MmnetStatus::BudgetExhausted);
        unsafe {
            mmnet_code_free(code);
            mmnet_network_free(net);
        }
    }

    #[test]
    fn membership_verdicts() {
        let net = fixture("bsc2");
        let mut v = MmnetVerdict::Boundary;
        for (rate, want) in [(0.52, MmnetVerdict::Member), (0.54, MmnetVerdict::NonMember)] {
            let rates = [rate, 0.0];
            let s = unsafe { mmnet_region_membership(net, rates.as_ptr(), 2, MmnetRegion::Out, &mut v) };
            assert_eq!(s, MmnetStatus::Ok);
            assert_eq!(v, want);
        }
        unsafe { mmnet_network_free(net) };
    }

    #[test]
    fn bad_input_reports_errors() {
        let mut net = ptr::null_mut();
        let bad = CString::new("{\"nodes\": 2").unwrap();
        assert_eq!(unsafe { mmnet_network_from_json(bad.as_ptr(), &mut net) }, MmnetStatus::ParseError);
        assert!(last_error().contains("line"));
        assert_eq!(unsafe { mmnet_network_from_json(ptr::null(), &mut net) }, MmnetStatus::NullPointer);
        let mut d = 0.0;
        let (p, q) = ([0.5, 0.5], [1.0, 0.0]);
        assert_eq!(unsafe { mmnet_renyi_divergence(p.as_ptr(), q.as_ptr(), 2, 2.0, &mut d) }, MmnetStatus::Ok);
        assert!(d.is_infinite());
        assert_eq!(unsafe { mmnet_renyi_divergence(p.as_ptr(), q.as_ptr(), 2, 0.5, &mut d) }, MmnetStatus::InvalidArgument);
    }

    #[test]
    fn panics_do_not_cross_the_boundary() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, MmnetStatus::Panic);
        assert_eq!(last_error(), "panic: boom");
    }
}
