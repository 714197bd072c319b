// Copyright 2026 The ftlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTLAB_IO_HPP
#define FTLAB_IO_HPP

/// \file io.hpp
/// JSON decoding of matrices, noise models, circuits and gadget graphs, and
/// deterministic JSON/CSV report encoding.

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ftlab/channels.hpp"
#include "ftlab/circuit.hpp"
#include "ftlab/gadgets.hpp"

namespace ftlab {

using json = nlohmann::json;

/// Malformed or schema-invalid input.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace io {

/// Reads fields of one JSON object, copying every accessed value (or its
/// default) into `resolved`. finish() rejects keys that were never read.
class Fields {
public:
    Fields(const json &in, json &resolved, std::string where) : in_(in), out_(resolved), where_(std::move(where)) {
        if (!in_.is_object()) {
            fail("must be an object");
        }
        if (!out_.is_object()) {
            out_ = json::object();
        }
    }

    bool has(const std::string &key) const { return in_.contains(key); }

    const json &raw(const std::string &key) {
        if (!in_.contains(key)) {
            fail("missing required field '" + key + "'");
        }
        seen_.insert(key);
        out_[key] = in_[key];
        return in_[key];
    }

    /// Marks a key as consumed without copying it (caller fills resolved).
    const json &take(const std::string &key) {
        if (!in_.contains(key)) {
            fail("missing required field '" + key + "'");
        }
        seen_.insert(key);
        return in_[key];
    }

    double number(const std::string &key) { return as_number(raw(key), key); }
    double number(const std::string &key, double def) {
        if (!has(key)) {
            out_[key] = def;
            return def;
        }
        return number(key);
    }

    std::uint64_t integer(const std::string &key) { return as_integer(raw(key), key); }
    std::uint64_t integer(const std::string &key, std::uint64_t def) {
        if (!has(key)) {
            out_[key] = def;
            return def;
        }
        return integer(key);
    }

    std::string string(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_string()) {
            fail("field '" + key + "' must be a string");
        }
        return v.get<std::string>();
    }
    std::string string(const std::string &key, const std::string &def) {
        if (!has(key)) {
            out_[key] = def;
            return def;
        }
        return string(key);
    }

    std::string choice(const std::string &key, const std::vector<std::string> &allowed, const std::string &def) {
        const std::string v = string(key, def);
        check_choice(key, v, allowed);
        return v;
    }
    std::string choice(const std::string &key, const std::vector<std::string> &allowed) {
        const std::string v = string(key);
        check_choice(key, v, allowed);
        return v;
    }

    std::vector<std::size_t> index_list(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_array()) {
            fail("field '" + key + "' must be an array of indices");
        }
        std::vector<std::size_t> out;
        for (const auto &x : v) {
            out.push_back(static_cast<std::size_t>(as_integer(x, key)));
        }
        return out;
    }

    void finish() const {
        for (const auto &[k, _] : in_.items()) {
            if (!seen_.contains(k)) {
                fail("unknown field '" + k + "'");
            }
        }
    }

    [[noreturn]] void fail(const std::string &msg) const { throw ValidationError(where_ + ": " + msg); }

    const std::string &where() const { return where_; }
    json &resolved() { return out_; }

    double as_number(const json &v, const std::string &key) const {
        if (!v.is_number()) {
            fail("field '" + key + "' must be a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail("field '" + key + "' must be finite");
        }
        return d;
    }

    std::uint64_t as_integer(const json &v, const std::string &key) const {
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        if (v.is_number_integer()) {
            const auto i = v.get<std::int64_t>();
            if (i < 0) {
                fail("field '" + key + "' must be non-negative");
            }
            return static_cast<std::uint64_t>(i);
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0 && d <= 9.007199254740992e15 && std::floor(d) == d) {
                return static_cast<std::uint64_t>(d);
            }
        }
        fail("field '" + key + "' must be a non-negative integer");
    }

private:
    void check_choice(const std::string &key, const std::string &v, const std::vector<std::string> &allowed) const {
        for (const auto &a : allowed) {
            if (a == v) {
                return;
            }
        }
        std::string list;
        for (const auto &a : allowed) {
            list += (list.empty() ? "" : ", ") + a;
        }
        fail("field '" + key + "' must be one of {" + list + "}, got '" + v + "'");
    }

    const json &in_;
    json &out_;
    std::string where_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Matrices and vectors

inline cplx parse_entry(const json &v, const std::string &where) {
    if (v.is_number()) {
        return {v.get<double>(), 0.0};
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ValidationError(where + ": complex entries must be numbers or [re, im] pairs");
}

inline bool is_entry(const json &v) { return v.is_number() || (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()); }

inline std::size_t qubit_count_for(std::size_t dim, const std::string &where) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    if ((std::size_t{1} << n) != dim || n == 0) {
        throw ValidationError(where + ": dimension " + std::to_string(dim) + " is not a power of two; give explicit dims");
    }
    return n;
}

/// Named gate ("I", "X", "Y", "Z", "H", "CNOT"), {"Rz": theta},
/// {"dims": [...], "data": entries}, a flat row-major list of entries, or a
/// list of rows. Entries are reals or [re, im] pairs.
inline Matrix parse_matrix(const json &v, const std::string &where) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "I") return gates::I();
        if (s == "X") return gates::X();
        if (s == "Y") return gates::Y();
        if (s == "Z") return gates::Z();
        if (s == "H") return gates::H();
        if (s == "CNOT") return gates::CNOT();
        throw ValidationError(where + ": unknown named gate '" + s + "'");
    }
    std::optional<SubsystemDims> dims;
    const json *data = &v;
    if (v.is_object()) {
        if (v.size() == 1 && v.contains("Rz")) {
            if (!v["Rz"].is_number()) {
                throw ValidationError(where + ": Rz angle must be a number");
            }
            return gates::Rz(v["Rz"].get<double>());
        }
        if (!v.contains("data")) {
            throw ValidationError(where + ": matrix object needs 'data'");
        }
        for (const auto &[k, _] : v.items()) {
            if (k != "data" && k != "dims") {
                throw ValidationError(where + ": unknown matrix field '" + k + "'");
            }
        }
        data = &v["data"];
        if (v.contains("dims")) {
            std::vector<std::size_t> dv;
            if (!v["dims"].is_array()) {
                throw ValidationError(where + ": dims must be an array");
            }
            for (const auto &d : v["dims"]) {
                if (!d.is_number_integer() || d.get<std::int64_t>() < 2) {
                    throw ValidationError(where + ": dims entries must be integers >= 2");
                }
                dv.push_back(d.get<std::size_t>());
            }
            dims = SubsystemDims(std::move(dv));
        }
    }
    if (!data->is_array() || data->empty()) {
        throw ValidationError(where + ": matrix data must be a nonempty array");
    }
    std::vector<cplx> flat;
    if (is_entry((*data)[0])) {
        for (const auto &e : *data) {
            flat.push_back(parse_entry(e, where));
        }
    } else {
        const std::size_t rows = data->size();
        for (const auto &row : *data) {
            if (!row.is_array() || row.size() != rows) {
                throw ValidationError(where + ": matrix rows must all have " + std::to_string(rows) + " entries");
            }
            for (const auto &e : row) {
                flat.push_back(parse_entry(e, where));
            }
        }
    }
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (d * d != flat.size()) {
        throw ValidationError(where + ": matrix entry count is not a perfect square");
    }
    if (!dims) {
        dims = SubsystemDims::qubits(qubit_count_for(d, where));
    }
    if (dims->total() != d) {
        throw ValidationError(where + ": dims do not match the matrix size");
    }
    DenseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * d + c];
        }
    }
    return Matrix(*dims, std::move(m));
}

/// "0", "1", "+", "-" or a list of entries.
inline DenseVector parse_state(const json &v, const std::string &where) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const double r = 1.0 / std::sqrt(2.0);
        DenseVector out(2);
        if (s == "0") {
            out << 1, 0;
        } else if (s == "1") {
            out << 0, 1;
        } else if (s == "+") {
            out << r, r;
        } else if (s == "-") {
            out << r, -r;
        } else {
            throw ValidationError(where + ": unknown named state '" + s + "'");
        }
        return out;
    }
    if (!v.is_array() || v.empty()) {
        throw ValidationError(where + ": state must be a named state or a nonempty list of entries");
    }
    DenseVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = parse_entry(v[i], where);
    }
    return out;
}

inline std::vector<Matrix> basis_projectors(const std::string &basis, const std::string &where) {
    if (basis == "Z") {
        return z_projectors();
    }
    if (basis == "X") {
        return x_projectors();
    }
    if (basis == "Y") {
        const Matrix s = gates::from_rows({2}, {{1, 0}, {0, gates::kI}});
        const auto x = x_projectors();
        return {s * x[0] * s.adjoint(), s * x[1] * s.adjoint()};
    }
    throw ValidationError(where + ": basis must be Z, X or Y");
}

// ---------------------------------------------------------------------------
// Noise models

inline NoiseSpec parse_noise_spec(const json &in, json &out, const std::string &where) {
    Fields f(in, out, where);
    const std::string kind =
        f.choice("kind", {"control_rotation", "amplitude_damping", "probabilistic", "depolarizing"});
    NoiseSpec spec;
    if (kind == "control_rotation") {
        spec = ControlRotation{f.number("delta_theta")};
    } else if (kind == "amplitude_damping") {
        spec = AmplitudeDamping{f.number("t0"), f.number("T1")};
    } else if (kind == "probabilistic") {
        Probabilistic p;
        p.p = f.number("p");
        if (f.has("E")) {
            p.E = parse_matrix(f.raw("E"), where + ".E");
        } else {
            f.resolved()["E"] = "X";
        }
        spec = p;
    } else {
        spec = Depolarizing{f.number("p"), static_cast<std::size_t>(f.integer("n_qubits", 1))};
    }
    f.finish();
    return spec;
}

inline std::size_t noise_spec_qubits(const NoiseSpec &spec) {
    if (const auto *p = std::get_if<Probabilistic>(&spec)) {
        return p->E.dims().size();
    }
    if (const auto *d = std::get_if<Depolarizing>(&spec)) {
        return d->n_qubits;
    }
    return 1;
}

inline std::string noise_kind(const NoiseSpec &spec) {
    static const char *names[] = {"control_rotation", "amplitude_damping", "probabilistic", "depolarizing"};
    return names[spec.index()];
}

/// Builds the channel, rethrowing parameter problems as validation errors.
inline Channel checked_noise_channel(const NoiseSpec &spec, const std::string &where) {
    try {
        return make_noise_channel(spec);
    } catch (const CapExceeded &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw ValidationError(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Circuits

inline Circuit parse_circuit(const json &in, json &out, const std::string &where) {
    Fields f(in, out, where);
    Circuit c;
    c.n_system = static_cast<std::size_t>(f.integer("n_system"));
    if (c.n_system > 12) {
        throw CapExceeded(where + ": n_system exceeds the 12-qubit cap");
    }
    const json &locs = f.take("locations");
    if (!locs.is_array()) {
        f.fail("'locations' must be an array");
    }
    json &rlocs = f.resolved()["locations"] = json::array();
    for (std::size_t i = 0; i < locs.size(); ++i) {
        const std::string lw = where + ".locations[" + std::to_string(i) + "]";
        json r = json::object();
        Fields lf(locs[i], r, lw);
        Location l;
        l.step = static_cast<std::size_t>(lf.integer("step"));
        const std::string kind = lf.choice("kind", {"prep", "gate", "measure", "idle"});
        l.support = lf.index_list("support");
        if (kind == "prep") {
            if (lf.has("state")) {
                l.op = Prep{parse_state(lf.raw("state"), lw + ".state")};
            } else {
                lf.resolved()["state"] = "0";
                l.op = Prep{parse_state("0", lw)};
            }
        } else if (kind == "gate") {
            l.op = Gate{parse_matrix(lf.raw("gate"), lw + ".gate")};
        } else if (kind == "measure") {
            if (lf.has("projectors")) {
                const json &ps = lf.raw("projectors");
                if (!ps.is_array() || ps.empty()) {
                    lf.fail("'projectors' must be a nonempty array");
                }
                Measure m;
                for (std::size_t a = 0; a < ps.size(); ++a) {
                    m.projectors.push_back(parse_matrix(ps[a], lw + ".projectors[" + std::to_string(a) + "]"));
                }
                l.op = std::move(m);
            } else {
                l.op = Measure{basis_projectors(lf.string("basis", "Z"), lw)};
            }
        } else {
            l.op = Idle{};
        }
        if (lf.has("condition")) {
            json rc = json::object();
            Fields cf(lf.take("condition"), rc, lw + ".condition");
            l.condition = Condition{static_cast<std::size_t>(cf.integer("location")),
                                    static_cast<std::size_t>(cf.integer("outcome"))};
            cf.finish();
            lf.resolved()["condition"] = rc;
        }
        lf.finish();
        rlocs.push_back(r);
        c.locations.push_back(std::move(l));
    }
    if (f.has("final_measure")) {
        const json &fm = f.take("final_measure");
        if (!fm.is_array()) {
            f.fail("'final_measure' must be an array");
        }
        json &rfm = f.resolved()["final_measure"] = json::array();
        for (std::size_t i = 0; i < fm.size(); ++i) {
            const std::string mw = where + ".final_measure[" + std::to_string(i) + "]";
            json r = json::object();
            Fields mf(fm[i], r, mw);
            FinalMeasurement m;
            m.qubit = static_cast<std::size_t>(mf.integer("qubit"));
            if (mf.has("projectors")) {
                const json &ps = mf.raw("projectors");
                if (!ps.is_array() || ps.empty()) {
                    mf.fail("'projectors' must be a nonempty array");
                }
                for (std::size_t a = 0; a < ps.size(); ++a) {
                    m.projectors.push_back(parse_matrix(ps[a], mw + ".projectors[" + std::to_string(a) + "]"));
                }
            } else {
                m.projectors = basis_projectors(mf.string("basis", "Z"), mw);
            }
            mf.finish();
            rfm.push_back(r);
            c.final_measure.push_back(std::move(m));
        }
    } else {
        f.resolved()["final_measure"] = json::array();
    }
    f.finish();
    const auto violations = validate_circuit(c);
    if (!violations.empty()) {
        std::string msg = where + ": invalid circuit:";
        for (const auto &v : violations) {
            msg += " [";
            if (v.location) {
                msg += "location " + std::to_string(*v.location) + ": ";
            }
            msg += v.message + "]";
        }
        throw ValidationError(msg);
    }
    return c;
}

struct NoiseEntry {
    std::size_t location = 0;
    NoiseSpec spec;
    Channel channel;
};

/// [{location, model, support?}]; support defaults to the location's support.
inline std::vector<NoiseEntry> parse_noise_list(const json &in, json &out, const Circuit &c, const std::string &where) {
    if (!in.is_array()) {
        throw ValidationError(where + ": must be an array");
    }
    out = json::array();
    std::vector<NoiseEntry> entries;
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::string nw = where + "[" + std::to_string(i) + "]";
        json r = json::object();
        Fields f(in[i], r, nw);
        const auto location = static_cast<std::size_t>(f.integer("location"));
        if (location >= c.size()) {
            f.fail("location " + std::to_string(location) + " does not exist");
        }
        if (!seen.insert(location).second) {
            f.fail("location " + std::to_string(location) + " given noise twice");
        }
        json rm = json::object();
        NoiseSpec spec = parse_noise_spec(f.take("model"), rm, nw + ".model");
        r["model"] = rm;
        std::vector<std::size_t> support;
        if (f.has("support")) {
            support = f.index_list("support");
        } else {
            support = c.locations[location].support;
            r["support"] = support;
        }
        const Channel base = checked_noise_channel(spec, nw + ".model");
        if (base.dims().size() != support.size()) {
            f.fail("model acts on " + std::to_string(base.dims().size()) + " qubit(s) but support has " +
                   std::to_string(support.size()));
        }
        const auto &ls = c.locations[location].support;
        for (std::size_t q : support) {
            if (std::find(ls.begin(), ls.end(), q) == ls.end()) {
                f.fail("non-local noise: qubit " + std::to_string(q) + " is outside location " +
                       std::to_string(location) + "'s support");
            }
        }
        if (std::set<std::size_t>(support.begin(), support.end()).size() != support.size()) {
            f.fail("support repeats a qubit");
        }
        f.finish();
        out.push_back(r);
        entries.push_back({location, spec, base.at(support)});
    }
    return entries;
}

inline NoiseMap to_noise_map(const std::vector<NoiseEntry> &entries) {
    NoiseMap m;
    for (const auto &e : entries) {
        m.emplace(e.location, e.channel);
    }
    return m;
}

/// {n_env, initial?, couplings: [{location, unitary} | {location, generator, angle}]}.
/// A generator G with angle a gives N = exp(-i a G).
inline EnvironmentSpec parse_environment(const json &in, json &out, const Circuit &c, const std::string &where) {
    Fields f(in, out, where);
    EnvironmentSpec env;
    env.n_env = static_cast<std::size_t>(f.integer("n_env"));
    if (c.n_system + env.n_env > 12) {
        throw CapExceeded(where + ": system plus environment exceeds the 12-qubit cap");
    }
    const std::size_t de = std::size_t{1} << env.n_env;
    if (f.has("initial")) {
        env.initial = parse_state(f.raw("initial"), where + ".initial");
        if (static_cast<std::size_t>(env.initial.size()) != de) {
            f.fail("initial state must have dimension " + std::to_string(de));
        }
        if (std::abs(env.initial.norm() - 1.0) > 1e-10) {
            f.fail("initial state must be normalized");
        }
    } else {
        env.initial = basis_state(de, 0);
        f.resolved()["initial"] = "zero";
    }
    const json &cs = f.take("couplings");
    if (!cs.is_array()) {
        f.fail("'couplings' must be an array");
    }
    json &rcs = f.resolved()["couplings"] = json::array();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string cw = where + ".couplings[" + std::to_string(i) + "]";
        json r = json::object();
        Fields cf(cs[i], r, cw);
        const auto location = static_cast<std::size_t>(cf.integer("location"));
        if (location >= c.size()) {
            cf.fail("location " + std::to_string(location) + " does not exist");
        }
        if (env.couplings.contains(location)) {
            cf.fail("location " + std::to_string(location) + " given a coupling twice");
        }
        Matrix n;
        if (cf.has("unitary")) {
            n = parse_matrix(cf.raw("unitary"), cw + ".unitary");
        } else {
            const Matrix g = parse_matrix(cf.raw("generator"), cw + ".generator");
            if (!is_hermitian(g, 1e-12)) {
                cf.fail("generator must be Hermitian");
            }
            n = gates::expi_hermitian(g, cf.number("angle"));
        }
        const std::size_t want = std::size_t{1} << (c.locations[location].support.size() + env.n_env);
        if (n.dim() != want) {
            cf.fail("coupling must act on the location's qubits plus every environment qubit (dimension " +
                    std::to_string(want) + ")");
        }
        if (!is_unitary(n)) {
            cf.fail("coupling is not unitary");
        }
        cf.finish();
        rcs.push_back(r);
        env.couplings.emplace(location, n.relabel(SubsystemDims::qubits(c.locations[location].support.size() + env.n_env)));
    }
    f.finish();
    return env;
}

// ---------------------------------------------------------------------------
// Gadget graphs

/// {gadgets: [{own_locations, er_out: {count, to} | [{count, to}, ...]}], t?}
inline GadgetGraph parse_gadget_graph(const json &in, json &out, const std::string &where,
                                      std::optional<std::size_t> *t_out = nullptr) {
    Fields f(in, out, where);
    const json &gs = f.take("gadgets");
    if (!gs.is_array() || gs.empty()) {
        f.fail("'gadgets' must be a nonempty array");
    }
    json &rgs = f.resolved()["gadgets"] = json::array();
    std::vector<GadgetSpec> specs;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const std::string gw = where + ".gadgets[" + std::to_string(i) + "]";
        json r = json::object();
        Fields gf(gs[i], r, gw);
        GadgetSpec s;
        s.own_locations = static_cast<std::size_t>(gf.integer("own_locations"));
        json rer = json::array();
        if (gf.has("er_out")) {
            const json &er = gf.take("er_out");
            std::vector<const json *> items;
            if (er.is_object()) {
                items.push_back(&er);
            } else if (er.is_array()) {
                for (const auto &e : er) {
                    items.push_back(&e);
                }
            } else {
                gf.fail("'er_out' must be an object or an array of objects");
            }
            for (std::size_t k = 0; k < items.size(); ++k) {
                json re = json::object();
                Fields ef(*items[k], re, gw + ".er_out[" + std::to_string(k) + "]");
                s.er_out.push_back({static_cast<std::size_t>(ef.integer("count")), static_cast<std::size_t>(ef.integer("to"))});
                ef.finish();
                rer.push_back(re);
            }
        }
        r["er_out"] = rer;
        gf.finish();
        rgs.push_back(r);
        specs.push_back(std::move(s));
    }
    if (f.has("t")) {
        const auto t = static_cast<std::size_t>(f.integer("t"));
        if (t_out != nullptr) {
            *t_out = t;
        }
    }
    f.finish();
    try {
        return GadgetGraph(std::move(specs));
    } catch (const std::invalid_argument &e) {
        throw ValidationError(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Report encoding

inline std::string format_double(double d) {
    if (!std::isfinite(d)) {
        return "null";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

namespace detail {

inline void write_json(const json &v, std::string &out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto &[k, x] : v.items()) {  // std::map: sorted keys
            if (!first) {
                out += ",\n";
            }
            first = false;
            out += pad + json(k).dump() + ": ";
            write_json(x, out, indent, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        const bool flat = std::all_of(v.begin(), v.end(), [](const json &x) {
            return !x.is_structured() || (x.is_array() && std::none_of(x.begin(), x.end(), [](const json &y) { return y.is_structured(); }));
        });
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += i > 0 ? ", " : "";
                write_json(v[i], out, indent, depth + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) {
                out += ",\n";
            }
            out += pad;
            write_json(v[i], out, indent, depth + 1);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case json::value_t::number_float:
        out += format_double(v.get<double>());
        return;
    default:
        out += v.dump();
        return;
    }
}

inline std::string csv_cell(const json &v) {
    if (v.is_number_float()) {
        const std::string s = format_double(v.get<double>());
        return s == "null" ? "" : s;
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_null()) {
        return "";
    }
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += (i > 0 ? ";" : "") + csv_cell(v[i]);
        }
        return s;
    }
    return v.dump();
}

}  // namespace detail

/// Pretty JSON with sorted keys and 17 significant digits for floats.
inline std::string to_json_text(const json &v) {
    std::string out;
    detail::write_json(v, out, 2, 0);
    out += "\n";
    return out;
}

/// Header row plus one row per record; list cells are joined with ';'.
inline std::string to_csv_text(const std::vector<std::string> &columns, const json &records) {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i > 0 ? "," : "") + columns[i];
    }
    out += "\n";
    for (const auto &r : records) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out += (i > 0 ? "," : "") + (r.contains(columns[i]) ? detail::csv_cell(r[columns[i]]) : std::string());
        }
        out += "\n";
    }
    return out;
}

}  // namespace io
}  // namespace ftlab

#endif  // FTLAB_IO_HPP
