#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofdmlink/channel.hpp"
#include "ofdmlink/grid.hpp"
#include "ofdmlink/rx.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

inline constexpr int kConfigSchemaVersion = 1;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Speed presets in m/s: "low", "medium", "high" and "training".
Range speed_preset(const std::string& name);

enum class SnrAxis { eb_over_sigma2_db, es_over_sigma2_db, sigma2_db };

enum class TransmitterKind { qam, gs, sip };

struct TransmitterSpec {
    TransmitterKind kind = TransmitterKind::qam;
    std::filesystem::path constellation_file;  ///< gs
    std::filesystem::path allocation_file;     ///< sip; empty means uniform_fraction
    double uniform_fraction = 0.0;             ///< sip without a file
    std::uint64_t sip_seed = 0x5EED'0003ULL;
};

/// Distribution the receiver-side covariance is averaged over.
struct CovarianceSpec {
    std::size_t samples = 100'000;
    Range speed{0.0, 32.5};
    Range delay_spread{10e-9, 1000e-9};
    std::vector<std::string> pdps{"TDL-B", "TDL-C"};
    std::uint64_t seed = 0xC0FFEE;
};

enum class ReceiverCovariance { empirical, true_model };

/// Defaults reproduce the evaluation setup: 72 x 14 grid, 2.6 GHz, 15 kHz,
/// 5.2 us CP, 64-QAM, 1944-bit rate-2/3 code, TDL-A, 70-140 ns.
struct ScenarioConfig {
    OfdmDims dims{72, 14};
    double carrier_hz = 2.6e9;
    double subcarrier_spacing_hz = 15e3;
    double cyclic_prefix_s = 5.2e-6;
    std::size_t bits_per_symbol = 6;

    std::vector<std::string> pdps{"TDL-A"};
    Range speed{0.0, 5.1};
    Range delay_spread{70e-9, 140e-9};

    SnrAxis snr_axis = SnrAxis::eb_over_sigma2_db;
    std::vector<double> snr_points{5, 8, 11, 14, 17};

    std::string pilots = "1P";
    std::uint64_t pilot_seed = kDefaultPilotSeed;
    std::uint64_t interleaver_seed = kDefaultInterleaverSeed;
    TransmitterSpec transmitter;

    std::vector<ReceiverKind> receivers{ReceiverKind::perfect_csi, ReceiverKind::non_iterative};
    ReceiverSettings receiver_settings;
    ReceiverCovariance receiver_covariance = ReceiverCovariance::empirical;
    std::filesystem::path covariance_file;  ///< cached empirical covariance tensor
    CovarianceSpec covariance;

    std::size_t frames = 1000;
    std::size_t frames_per_block = 0;  ///< 0: smallest block holding one codeword
    std::uint64_t min_errors = 100;
    bool force = false;
    std::uint64_t seed = 1;

    [[nodiscard]] RadioParams radio() const;
    void validate() const;
};

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace ofdmlink
