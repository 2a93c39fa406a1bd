#include "xfmr/mlp.hpp"

#include <cmath>
#include <random>

#include "xfmr/errors.hpp"

namespace xfmr {

NetSpec NetSpec::for_physics(int dim, int hidden_layers, int hidden_width) {
    if (dim != 1 && dim != 2) throw ArgumentError("net spec: dim must be 1 or 2");
    NetSpec s;
    s.input_dim = dim + 4;
    s.hidden_layers = hidden_layers;
    s.hidden_width = hidden_width;
    s.output_dim = 1;
    s.validate();
    return s;
}

void NetSpec::validate() const {
    if (input_dim < 1) throw ArgumentError("net spec: input_dim must be >= 1");
    if (hidden_layers < 1) throw ArgumentError("net spec: need at least one hidden layer");
    if (hidden_width < 1) throw ArgumentError("net spec: hidden_width must be >= 1");
    if (output_dim != 1) throw ArgumentError("net spec: output_dim must be 1");
}

std::size_t NetSpec::parameter_count() const {
    std::size_t n = 0;
    for (int l = 0; l < layer_count(); ++l) {
        n += static_cast<std::size_t>(fan_out(l)) * (fan_in(l) + 1);
    }
    return n;
}

NetworkParams::NetworkParams(const NetSpec& spec) : NetworkParams(spec, std::vector<double>(spec.parameter_count())) {}

NetworkParams::NetworkParams(const NetSpec& spec, std::vector<double> flat) : spec_(spec), flat_(std::move(flat)) {
    spec_.validate();
    if (flat_.size() != spec_.parameter_count()) {
        throw ArgumentError("network params: expected " + std::to_string(spec_.parameter_count()) + " values, got " +
                            std::to_string(flat_.size()));
    }
    std::size_t off = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
        offsets_.push_back(off);
        off += static_cast<std::size_t>(spec_.fan_out(l)) * (spec_.fan_in(l) + 1);
    }
}

std::size_t NetworkParams::bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(spec_.fan_out(layer)) * spec_.fan_in(layer);
}

NetworkParams::MatrixMap NetworkParams::weight(int layer) {
    return MatrixMap(flat_.data() + offsets_[layer], spec_.fan_out(layer), spec_.fan_in(layer));
}

NetworkParams::ConstMatrixMap NetworkParams::weight(int layer) const {
    return ConstMatrixMap(flat_.data() + offsets_[layer], spec_.fan_out(layer), spec_.fan_in(layer));
}

NetworkParams::VectorMap NetworkParams::bias(int layer) {
    return VectorMap(flat_.data() + bias_offset(layer), spec_.fan_out(layer));
}

NetworkParams::ConstVectorMap NetworkParams::bias(int layer) const {
    return ConstVectorMap(flat_.data() + bias_offset(layer), spec_.fan_out(layer));
}

NetworkParams init_xavier(const NetSpec& spec, std::uint64_t seed) {
    spec.validate();
    NetworkParams p(spec);
    std::mt19937_64 rng(seed);
    for (int l = 0; l < spec.layer_count(); ++l) {
        const double bound = std::sqrt(6.0 / (spec.fan_in(l) + spec.fan_out(l)));
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto w = p.weight(l);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
        }
        p.bias(l).setZero();
    }
    return p;
}

JetBatch JetBatch::zeros(Eigen::Index n, Eigen::Index directions) {
    JetBatch b;
    b.value = Eigen::VectorXd::Zero(n);
    b.first = Eigen::MatrixXd::Zero(n, directions);
    b.second = Eigen::MatrixXd::Zero(n, directions);
    return b;
}

JetTape::JetTape(const NetworkParams& params, const Eigen::MatrixXd& inputs, std::vector<int> directions)
    : params_(params), directions_(std::move(directions)) {
    const NetSpec& spec = params.spec();
    if (inputs.rows() != spec.input_dim) {
        throw ArgumentError("jet: input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                            std::to_string(spec.input_dim));
    }
    for (int d : directions_) {
        if (d < 0 || d >= spec.input_dim) throw ArgumentError("jet: direction index " + std::to_string(d) + " invalid");
    }
    const Eigen::Index n = inputs.cols();
    const std::size_t nd = directions_.size();
    const int nl = spec.layer_count();
    layers_.resize(nl);

    Eigen::MatrixXd h = inputs;
    std::vector<Eigen::MatrixXd> h1(nd), h2(nd);
    for (int l = 0; l < nl; ++l) {
        Layer& layer = layers_[l];
        const auto w = params.weight(l);
        const auto b = params.bias(l);

        Eigen::MatrixXd a = w * h;
        a.colwise() += b;
        std::vector<Eigen::MatrixXd> a1(nd), a2(nd);
        for (std::size_t d = 0; d < nd; ++d) {
            if (l == 0) {
                a1[d] = w.col(directions_[d]).replicate(1, n);
                a2[d] = Eigen::MatrixXd::Zero(w.rows(), n);
            } else {
                a1[d] = w * h1[d];
                a2[d] = w * h2[d];
            }
        }
        layer.input = std::move(h);
        if (l > 0) {
            layer.input_d1 = std::move(h1);
            layer.input_d2 = std::move(h2);
            h1.assign(nd, {});
            h2.assign(nd, {});
        }

        if (l == nl - 1) {
            out_.value = a.row(0).transpose();
            out_.first.resize(n, static_cast<Eigen::Index>(nd));
            out_.second.resize(n, static_cast<Eigen::Index>(nd));
            for (std::size_t d = 0; d < nd; ++d) {
                out_.first.col(d) = a1[d].row(0).transpose();
                out_.second.col(d) = a2[d].row(0).transpose();
            }
            break;
        }

        layer.s = a.array().tanh();
        layer.s1 = 1.0 - layer.s.square();
        layer.s2 = -2.0 * layer.s * layer.s1;
        h = layer.s.matrix();
        layer.a1.resize(nd);
        layer.a2.resize(nd);
        for (std::size_t d = 0; d < nd; ++d) {
            layer.a1[d] = a1[d].array();
            layer.a2[d] = a2[d].array();
            h1[d] = (layer.s1 * layer.a1[d]).matrix();
            h2[d] = (layer.s2 * layer.a1[d].square() + layer.s1 * layer.a2[d]).matrix();
        }
    }
}

void JetTape::backward(const JetBatch& adjoint, std::span<double> grad) const {
    const NetSpec& spec = params_.spec();
    const Eigen::Index n = batch_size();
    const std::size_t nd = directions_.size();
    if (grad.size() != params_.size()) throw ArgumentError("jet backward: gradient buffer has the wrong size");
    if (adjoint.value.size() != n || adjoint.first.rows() != n || adjoint.second.rows() != n ||
        adjoint.first.cols() != static_cast<Eigen::Index>(nd) || adjoint.second.cols() != static_cast<Eigen::Index>(nd)) {
        throw ArgumentError("jet backward: adjoint shape does not match the tape");
    }

    // Adjoints of A_l, A'_l, A''_l for the current layer (fan_out x N).
    Eigen::MatrixXd g = adjoint.value.transpose();
    std::vector<Eigen::MatrixXd> g1(nd), g2(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        g1[d] = adjoint.first.col(d).transpose();
        g2[d] = adjoint.second.col(d).transpose();
    }

    for (int l = spec.layer_count() - 1; l >= 0; --l) {
        const Layer& layer = layers_[l];
        const auto w = params_.weight(l);
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + params_.weight_offset(l), w.rows(), w.cols());
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + params_.bias_offset(l), w.rows());

        gw.noalias() += g * layer.input.transpose();
        for (std::size_t d = 0; d < nd; ++d) {
            if (l == 0) {
                // H'_0 is the unit vector e_dir in every column, H''_0 is zero.
                gw.col(directions_[d]) += g1[d].rowwise().sum();
            } else {
                gw.noalias() += g1[d] * layer.input_d1[d].transpose();
                gw.noalias() += g2[d] * layer.input_d2[d].transpose();
            }
        }
        gb += g.rowwise().sum();
        if (l == 0) break;

        const Layer& prev = layers_[l - 1];
        const Eigen::ArrayXXd hbar = (w.transpose() * g).array();
        Eigen::ArrayXXd ga = hbar * prev.s1;
        std::vector<Eigen::MatrixXd> next1(nd), next2(nd);
        if (nd > 0) {
            const Eigen::ArrayXXd s3 = -2.0 * prev.s1.square() + 4.0 * prev.s.square() * prev.s1;
            for (std::size_t d = 0; d < nd; ++d) {
                const Eigen::ArrayXXd h1bar = (w.transpose() * g1[d]).array();
                const Eigen::ArrayXXd h2bar = (w.transpose() * g2[d]).array();
                const auto& a1 = prev.a1[d];
                const auto& a2 = prev.a2[d];
                ga += h1bar * prev.s2 * a1 + h2bar * (s3 * a1.square() + prev.s2 * a2);
                next1[d] = (h1bar * prev.s1 + 2.0 * h2bar * prev.s2 * a1).matrix();
                next2[d] = (h2bar * prev.s1).matrix();
            }
        }
        g = ga.matrix();
        g1 = std::move(next1);
        g2 = std::move(next2);
    }
}

Eigen::VectorXd forward_batch(const NetworkParams& p, const Eigen::MatrixXd& inputs) {
    return JetTape(p, inputs, {}).outputs().value;
}

double forward(const NetworkParams& p, std::span<const double> z) {
    if (static_cast<int>(z.size()) != p.spec().input_dim) {
        throw ArgumentError("forward: input length " + std::to_string(z.size()) + ", expected " +
                            std::to_string(p.spec().input_dim));
    }
    Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    return forward_batch(p, in)[0];
}

DirectionalJet input_jet(const NetworkParams& p, std::span<const double> z, std::span<const int> wrt) {
    if (static_cast<int>(z.size()) != p.spec().input_dim) {
        throw ArgumentError("input_jet: input length " + std::to_string(z.size()) + ", expected " +
                            std::to_string(p.spec().input_dim));
    }
    Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    JetTape tape(p, in, std::vector<int>(wrt.begin(), wrt.end()));
    const auto& out = tape.outputs();
    DirectionalJet jet;
    jet.value = out.value[0];
    for (Eigen::Index d = 0; d < out.first.cols(); ++d) {
        jet.first.push_back(out.first(0, d));
        jet.second.push_back(out.second(0, d));
    }
    return jet;
}

namespace {

[[noreturn]] void report_non_finite(const JetBatch& jets, std::size_t term) {
    for (Eigen::Index i = 0; i < jets.value.size(); ++i) {
        const bool bad = !std::isfinite(jets.value[i]) || !jets.first.row(i).allFinite() ||
                         !jets.second.row(i).allFinite();
        if (bad) throw NumericError("non-finite network output in loss term " + std::to_string(term), i);
    }
    throw NumericError("non-finite loss in term " + std::to_string(term), 0);
}

}  // namespace

LossGradient param_gradient(const NetworkParams& p, std::span<const LossTerm> terms) {
    LossGradient result;
    result.gradient.assign(p.size(), 0.0);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const LossTerm& term = terms[k];
        JetTape tape(p, term.inputs, term.directions);
        JetBatch adjoint = JetBatch::zeros(tape.batch_size(), static_cast<Eigen::Index>(term.directions.size()));
        const double v = term.evaluate(tape.outputs(), adjoint);
        if (!std::isfinite(v)) report_non_finite(tape.outputs(), k);
        result.value += v;
        tape.backward(adjoint, result.gradient);
    }
    return result;
}

double loss_value(const NetworkParams& p, std::span<const LossTerm> terms) {
    double total = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const LossTerm& term = terms[k];
        JetTape tape(p, term.inputs, term.directions);
        JetBatch adjoint = JetBatch::zeros(tape.batch_size(), static_cast<Eigen::Index>(term.directions.size()));
        const double v = term.evaluate(tape.outputs(), adjoint);
        if (!std::isfinite(v)) report_non_finite(tape.outputs(), k);
        total += v;
    }
    return total;
}

}  // namespace xfmr
