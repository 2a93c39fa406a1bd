#pragma once

// Fully connected tanh network with exact input derivatives.
//
// The batch engine pushes, for every requested input direction e_d, the
// triple (value, d/dz_d, d^2/dz_d^2) through each layer (Taylor mode), and
// reverse-accumulates parameter gradients through that extended pass. Only
// pure second derivatives along the requested directions are produced.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace xfmr {

struct NetSpec {
    int input_dim = 5;
    int hidden_layers = 4;
    int hidden_width = 50;
    int output_dim = 1;

    /// Input layer of size dim + 4: space coordinates, t, K, Ta, To.
    static NetSpec for_physics(int dim, int hidden_layers, int hidden_width);

    void validate() const;
    int layer_count() const { return hidden_layers + 1; }
    int fan_in(int layer) const { return layer == 0 ? input_dim : hidden_width; }
    int fan_out(int layer) const { return layer == hidden_layers ? output_dim : hidden_width; }
    std::size_t parameter_count() const;

    bool operator==(const NetSpec&) const = default;
};

/// Weights and biases stored in one flat vector. Layer l occupies a
/// column-major fan_out x fan_in weight block followed by its bias.
class NetworkParams {
public:
    explicit NetworkParams(const NetSpec& spec);
    NetworkParams(const NetSpec& spec, std::vector<double> flat);

    const NetSpec& spec() const { return spec_; }
    std::size_t size() const { return flat_.size(); }
    std::span<double> flat() { return flat_; }
    std::span<const double> flat() const { return flat_; }
    const std::vector<double>& vector() const { return flat_; }

    using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    MatrixMap weight(int layer);
    ConstMatrixMap weight(int layer) const;
    VectorMap bias(int layer);
    ConstVectorMap bias(int layer) const;

    std::size_t weight_offset(int layer) const { return offsets_[layer]; }
    std::size_t bias_offset(int layer) const;

    bool operator==(const NetworkParams& o) const { return spec_ == o.spec_ && flat_ == o.flat_; }

private:
    NetSpec spec_;
    std::vector<double> flat_;
    std::vector<std::size_t> offsets_;
};

/// Xavier-uniform weights, zero biases. Deterministic per seed.
NetworkParams init_xavier(const NetSpec& spec, std::uint64_t seed);

double forward(const NetworkParams& p, std::span<const double> z);

/// Network outputs for a batch; inputs are input_dim x N (one column per point).
Eigen::VectorXd forward_batch(const NetworkParams& p, const Eigen::MatrixXd& inputs);

/// Output value plus first and second derivatives along each requested
/// input slot, in request order.
struct DirectionalJet {
    double value = 0.0;
    std::vector<double> first;
    std::vector<double> second;
};

DirectionalJet input_jet(const NetworkParams& p, std::span<const double> z, std::span<const int> wrt);

/// Batch of jets. `first` and `second` are N x D, one column per direction.
/// The same layout holds loss adjoints on the way back.
struct JetBatch {
    Eigen::VectorXd value;
    Eigen::MatrixXd first;
    Eigen::MatrixXd second;

    static JetBatch zeros(Eigen::Index n, Eigen::Index directions);
};

/// Forward pass with stored intermediates; `backward` accumulates the
/// parameter gradient for given output adjoints. Keeps a reference to the
/// parameters, which must outlive the tape.
class JetTape {
public:
    JetTape(const NetworkParams& params, const Eigen::MatrixXd& inputs, std::vector<int> directions);

    const JetBatch& outputs() const { return out_; }
    const std::vector<int>& directions() const { return directions_; }
    Eigen::Index batch_size() const { return out_.value.size(); }

    /// grad += d(sum of adjoint * outputs)/d(params).
    void backward(const JetBatch& adjoint, std::span<double> grad) const;

private:
    struct Layer {
        Eigen::MatrixXd input;                 // H_l
        std::vector<Eigen::MatrixXd> input_d1; // H'_l per direction (unused for layer 0)
        std::vector<Eigen::MatrixXd> input_d2; // H''_l
        Eigen::ArrayXXd s, s1, s2;             // tanh and its derivatives at A_l (hidden only)
        std::vector<Eigen::ArrayXXd> a1, a2;   // A'_l, A''_l (hidden only)
    };

    const NetworkParams& params_;
    std::vector<int> directions_;
    std::vector<Layer> layers_;
    JetBatch out_;
};

/// One block of a composite objective: a batch, the directions it needs and
/// a callback returning the block's loss contribution while filling the
/// adjoint (d loss / d jet entries, same shapes as the jets).
struct LossTerm {
    Eigen::MatrixXd inputs;
    std::vector<int> directions;
    std::function<double(const JetBatch& jets, JetBatch& adjoint)> evaluate;
};

struct LossGradient {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Exact loss and parameter gradient of the sum of all terms, reduced in
/// term order and batch order. Throws NumericError on a non-finite loss.
LossGradient param_gradient(const NetworkParams& p, std::span<const LossTerm> terms);

/// Loss only; the same value `param_gradient` reports.
double loss_value(const NetworkParams& p, std::span<const LossTerm> terms);

}  // namespace xfmr
