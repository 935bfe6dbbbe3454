#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfield {

/// Multichannel sampled capture. Channel order is mic index order. `meta`
/// holds a JSON provenance blob (band, seed, trajectory digest, ...).
struct Recording {
    double sample_rate = 0.0;
    std::vector<std::vector<double>> channels;
    std::string meta; // JSON text; empty when unknown

    std::size_t channel_count() const { return channels.size(); }
    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
    double duration() const { return sample_rate > 0 ? frames() / sample_rate : 0.0; }

    void validate() const {
        if (!(sample_rate > 0.0)) throw std::invalid_argument("recording: bad sample rate");
        if (channels.empty()) throw std::invalid_argument("recording: no channels");
        for (const auto& c : channels)
            if (c.size() != frames())
                throw std::invalid_argument("recording: channel length mismatch");
    }
};

} // namespace dfield
