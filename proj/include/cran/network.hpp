#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <vector>

namespace cran {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  std::vector<Point> rrhs;
  std::vector<Point> users;
};

/// Pathloss 128.1 + 37.6 log10(d_km) dB, log-normal shadowing, Rayleigh
/// small-scale fading. Gains are expressed relative to `noise_reference_dbm`,
/// so a user whose noise power equals the reference has sigma^2 = 1.
struct ChannelModel {
  double pathloss_intercept_db = 128.1;
  double pathloss_slope_db = 37.6;
  double shadowing_std_db = 8.0;
  double min_distance_m = 10.0;
  double noise_reference_dbm = -102.0;
};

struct PowerModel {
  Vec fronthaul_w;       // P^c_l
  Vec drain_efficiency;  // eta_l
  Vec max_tx_w;          // P^max_l
};

/// One realization of a Cloud-RAN: geometry, power model, QoS and channel.
///
/// H is K x N with N = sum of antennas; row k is h_k^H's conjugate, i.e. the
/// received signal of user k is sum_j h_k^H v_j with h_k = H.row(k)^T.
struct NetworkInstance {
  Topology topology;
  std::vector<int> antennas;
  PowerModel power;
  Vec target_sinr;  // gamma_k, linear
  Vec noise_power;  // sigma_k^2, in the channel-normalized unit
  CMat H;
  Mat large_scale;  // g, K x L

  int num_rrhs() const { return static_cast<int>(antennas.size()); }
  int num_users() const { return static_cast<int>(target_sinr.size()); }
  int num_antennas() const;
  int antenna_offset(int rrh) const;
  CVec channel(int user) const { return H.row(user).transpose(); }

  /// Throws InvalidArgument on inconsistent sizes or nonpositive parameters.
  void validate() const;
};

/// i.i.d. uniform positions in [-half_width, half_width]^2.
Topology generate_topology(std::uint64_t seed, int num_rrhs, int num_users, double half_width);

/// g_{k,l}: pathloss times shadowing, normalized by the reference noise power.
Mat large_scale_fading(const Topology& topo, const ChannelModel& model,
                       std::uint64_t shadowing_seed);

/// H_{k,(l,a)} = sqrt(g_{k,l}) * xi with xi ~ CN(0, 1) i.i.d.
CMat small_scale_channel(const Mat& large_scale, const std::vector<int>& antennas,
                         std::uint64_t fading_seed);

struct ChannelSample {
  CMat H;
  Mat large_scale;
};

/// Large-scale and small-scale draws from the "shadowing" and "fading" streams of `seed`.
ChannelSample sample_channel(const Topology& topo, const std::vector<int>& antennas,
                             const ChannelModel& model, std::uint64_t seed);

/// Parameters for building a NetworkInstance from a seed.
struct NetworkConfig {
  int num_rrhs = 10;
  int antennas_per_rrh = 2;
  int num_users = 15;
  double half_width_m = 1000.0;
  /// Per-RRH fronthaul power; empty means (5 + l) W for l = 1..L.
  std::vector<double> fronthaul_w;
  double max_tx_w = 1.0;
  double drain_efficiency = 1.0;
  double target_sinr_db = 0.0;
  double noise_power = 1.0;
  ChannelModel channel;
};

NetworkInstance make_instance(const NetworkConfig& config, std::uint64_t seed);

/// SINR_k = |h_k^H v_k|^2 / (sum_{j != k} |h_k^H v_j|^2 + sigma_k^2).
Vec evaluate_sinr(const CMat& H, const CMat& V, const Vec& noise_power);

/// sum_{l in active} (1/eta_l) ||v~_l||^2 + sum_{l in active} P^c_l.
/// Throws InvalidArgument if an inactive RRH carries a nonzero coefficient.
double network_power(const CMat& V, const std::vector<int>& active_set,
                     const NetworkInstance& inst);

/// Per-RRH transmit power ||v~_l||^2 (without drain efficiency).
Vec group_power(const CMat& V, const std::vector<int>& antennas);

double db_to_linear(double db);
double linear_to_db(double lin);

}  // namespace cran
