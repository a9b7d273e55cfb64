#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hhemb/abinitio.hpp"
#include "hhemb/cli.hpp"
#include "hhemb/embed.hpp"
#include "hhemb/error.hpp"
#include "hhemb/fci.hpp"
#include "hhemb/householder.hpp"
#include "hhemb/lattice.hpp"

namespace py = pybind11;
using namespace hhemb;

namespace {

LatticeSpec lattice(int n_sites, double t, double u, const std::string& boundary) {
  LatticeSpec s;
  s.n_sites = n_sites;
  s.t = t;
  s.u = u;
  s.boundary = parse_boundary(boundary);
  return s;
}

py::dict report_dict(const EmbeddingReport& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["mu_tilde"] = r.mu_tilde;
  d["v_hxc"] = r.v_hxc;
  d["density"] = r.density;
  d["cluster_density"] = r.cluster_density;
  d["residual"] = r.residual;
  d["per_site_energy"] = r.per_site_energy;
  d["n_per_spin"] = r.n_per_spin;
  d["rdm1"] = r.cluster_solution.rdm1;
  d["message"] = r.message;
  return d;
}

py::dict integrals_dict(const IntegralSet& ints) {
  py::dict d;
  d["n_orb"] = ints.n_orb;
  d["n_elec"] = ints.n_elec;
  d["ms2"] = ints.ms2;
  d["e_core"] = ints.e_core;
  d["h1"] = ints.h1;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hhemb, m) {
  m.doc() = "Block-Householder embedding of lattice and molecular Hamiltonians.";
  m.attr("__version__") = version();

  static PyObject* const error_type = PyErr_NewException("hhemb.HhembError", PyExc_RuntimeError, nullptr);
  m.add_object("HhembError", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("code") = error_name(e.code());
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  m.def("build_h1", [](int n_sites, double t, double u, const std::string& boundary, double v_hxc) {
    return build_h1(lattice(n_sites, t, u, boundary), v_hxc);
  }, py::arg("n_sites"), py::arg("t") = 1.0, py::arg("u") = 0.0, py::arg("boundary") = "periodic",
     py::arg("v_hxc") = 0.0);

  m.def("meanfield_rdm", [](const Matrix& h, int n_per_spin) { return meanfield_rdm(h, n_per_spin).gamma; },
        py::arg("h"), py::arg("n_per_spin"));

  m.def("filling_from_mu", [](const Matrix& h, double mu) {
    const Filling f = filling_from_mu(h, mu);
    return py::make_tuple(f.n_per_spin, f.density);
  }, py::arg("h"), py::arg("mu"));

  m.def("block_householder", [](const Matrix& gamma, int n_elec_per_spin, const std::vector<int>& fragment,
                                bool pivot) {
    const FragmentPartition frag = make_partition(static_cast<int>(gamma.rows()), fragment);
    const HouseholderResult hr = build_block_householder(make_density(gamma, n_elec_per_spin), frag, {pivot});
    py::dict d;
    d["r"] = hr.r;
    d["v"] = hr.v;
    d["gamma_tilde"] = hr.gamma_tilde;
    d["w"] = hr.w;
    d["order"] = hr.order;
    d["coeffs"] = cluster_coeffs(hr);
    d["bath"] = householder_bath(hr).coeffs;
    d["idempotent_source"] = hr.idempotent_source;
    return d;
  }, py::arg("gamma"), py::arg("n_elec_per_spin"), py::arg("fragment"), py::arg("pivot") = false);

  m.def("svd_bath", [](const Matrix& gamma, int n_elec_per_spin, const std::vector<int>& fragment) {
    const FragmentPartition frag = make_partition(static_cast<int>(gamma.rows()), fragment);
    const BathSpace b = svd_bath(make_density(gamma, n_elec_per_spin), frag);
    return py::make_tuple(b.coeffs, *b.singular_values);
  }, py::arg("gamma"), py::arg("n_elec_per_spin"), py::arg("fragment"));

  m.def("subspace_distance", [](const Matrix& a, const Matrix& b) {
    return subspace_distance({a, {}}, {b, {}});
  }, py::arg("a"), py::arg("b"));

  m.def("hubbard_fci", [](int n_sites, double u, int n_per_spin, double t, const std::string& boundary) {
    const LatticeSpec s = lattice(n_sites, t, u, boundary);
    FciOptions o;
    o.want_rdm2 = false;
    const FciProblem p{build_h1(s), TwoBody{OnSiteInteraction{Vector::Constant(n_sites, u)}}, 0.0, n_per_spin,
                       n_per_spin};
    return ground_state(p, o).energy;
  }, py::arg("n_sites"), py::arg("u"), py::arg("n_per_spin"), py::arg("t") = 1.0,
     py::arg("boundary") = "periodic");

  m.def("htdmfet_lattice", [](int n_sites, double u, int n_per_spin, int frag_size, const std::string& bath,
                              double t, const std::string& boundary, bool pivot) {
    HtDmfetConfig c;
    c.mode = parse_bath(bath);
    c.frag_size = frag_size;
    c.pivot = pivot;
    return report_dict(htdmfet_lattice(lattice(n_sites, t, u, boundary), c, n_per_spin));
  }, py::arg("n_sites"), py::arg("u"), py::arg("n_per_spin"), py::arg("frag_size") = 1, py::arg("bath") = "IB",
     py::arg("t") = 1.0, py::arg("boundary") = "antiperiodic", py::arg("pivot") = false);

  m.def("lpfet", [](int n_sites, double u, double mu, int frag_size, double t, const std::string& boundary) {
    LpfetConfig c;
    c.frag_size = frag_size;
    c.mu_lattice = mu;
    return report_dict(lpfet(lattice(n_sites, t, u, boundary), c));
  }, py::arg("n_sites"), py::arg("u"), py::arg("mu"), py::arg("frag_size") = 1, py::arg("t") = 1.0,
     py::arg("boundary") = "antiperiodic");

  m.def("read_fcidump", [](const std::string& path) { return integrals_dict(read_fcidump(path)); },
        py::arg("path"));

  m.def("molecule", [](const std::string& fcidump, const std::string& overlap,
                       const std::vector<std::vector<int>>& fragments, const std::string& bath) {
    IntegralSet ints = read_fcidump(fcidump);
    if (!overlap.empty()) ints = to_oao(ints, read_overlap(overlap));
    MolecularConfig c;
    c.mode = parse_bath(bath);
    c.fragments = fragments;
    const MolecularReport r = htdmfet_molecule(ints, c);
    FciOptions o;
    o.want_rdm2 = false;
    py::dict d;
    d["converged"] = r.converged;
    d["e_hf"] = r.e_hf;
    d["e_embedding"] = r.e_embedding;
    d["e_fci"] = ground_state(FciProblem{ints.h1, TwoBody{ints.g2}, ints.e_core, ints.n_elec / 2, ints.n_elec / 2}, o)
                     .energy;
    d["mu_tilde"] = r.mu_tilde;
    d["electron_count"] = r.electron_count;
    d["scf_commutator"] = r.scf.commutator;
    return d;
  }, py::arg("fcidump"), py::arg("overlap") = "", py::arg("fragments"), py::arg("bath") = "IB");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<std::string> all{"hhemb"};
    all.insert(all.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : all) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
