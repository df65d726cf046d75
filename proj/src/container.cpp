#include "orf/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "orf/json_io.hpp"

namespace orf {

using nlohmann::json;

namespace {

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {
        static_cast<char>(v & 0xff),
        static_cast<char>((v >> 8) & 0xff),
        static_cast<char>((v >> 16) & 0xff),
        static_cast<char>((v >> 24) & 0xff),
    };
    out.write(bytes, 4);
}

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_f32_payload(std::ostream& out, const std::vector<float>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        for (float f : values) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            write_u32_le(out, bits);
        }
    }
}

void read_f32_payload(const unsigned char* p, std::size_t count, std::vector<float>& out) {
    out.resize(count);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data(), p, count * sizeof(float));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint32_t bits = read_u32_le(p + i * 4);
            std::memcpy(&out[i], &bits, 4);
        }
    }
}

template <typename Fn>
auto format_guard(const char* field, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw FormatError(std::string("container header field '") + field +
                          "': " + e.what());
    }
}

} // namespace

void save_container(const VideoStream& video, const AudioStream& audio,
                    const HyperParams* params, const GroundTruthBoundaries* truth,
                    const std::string& path) {
    validate_pair(video, audio);
    if (params) params->validate();

    json header{
        {"dim", audio.tokens.dim},
        {"num_frames", video.num_frames},
        {"grid_h", video.grid_h},
        {"grid_w", video.grid_w},
        {"num_audio_tokens", audio.num_tokens},
        {"frame_bucket", video.frame_bucket},
        {"token_bucket", audio.token_bucket},
        {"hyperparams", params ? hyperparams_to_json(*params) : json(nullptr)},
        {"ground_truth_boundaries", truth ? ground_truth_to_json(*truth) : json(nullptr)},
    };
    // A zero-frame video has no rows of its own to pin the dim; prefer the
    // video dim when it exists so both payload sections agree.
    if (video.num_frames > 0) header["dim"] = video.tokens.dim;

    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    out.write(kContainerMagic, sizeof(kContainerMagic));
    write_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    write_f32_payload(out, video.tokens.values);
    write_f32_payload(out, audio.tokens.values);
    if (!out) throw IoError("write failure on '" + path + "'");
}

LoadedContainer load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof(kContainerMagic) + 4) {
        throw FormatError("container too short for magic and header length");
    }
    if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
        throw FormatError("bad magic: not an ORTC container");
    }
    if (std::memcmp(bytes.data(), kContainerMagic, sizeof(kContainerMagic)) != 0) {
        throw FormatError("unsupported container version (expected ORTC0001)");
    }

    const std::uint32_t header_len = read_u32_le(bytes.data() + 8);
    const std::size_t header_off = sizeof(kContainerMagic) + 4;
    if (bytes.size() < header_off + header_len) {
        throw FormatError("truncated container: header length exceeds file size");
    }

    json header;
    try {
        header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(header_off),
                             bytes.begin() + static_cast<std::ptrdiff_t>(header_off + header_len));
    } catch (const json::exception& e) {
        throw FormatError(std::string("container header is not valid JSON: ") + e.what());
    }

    LoadedContainer loaded;
    const auto dim = format_guard("dim", [&] { return header.at("dim").get<std::size_t>(); });
    const auto num_frames =
        format_guard("num_frames", [&] { return header.at("num_frames").get<std::size_t>(); });
    const auto grid_h = format_guard("grid_h", [&] { return header.at("grid_h").get<std::size_t>(); });
    const auto grid_w = format_guard("grid_w", [&] { return header.at("grid_w").get<std::size_t>(); });
    const auto num_audio = format_guard(
        "num_audio_tokens", [&] { return header.at("num_audio_tokens").get<std::size_t>(); });

    loaded.video.num_frames = num_frames;
    loaded.video.grid_h = grid_h;
    loaded.video.grid_w = grid_w;
    loaded.video.frame_bucket = format_guard(
        "frame_bucket", [&] { return header.at("frame_bucket").get<std::vector<int>>(); });
    loaded.audio.num_tokens = num_audio;
    loaded.audio.token_bucket = format_guard(
        "token_bucket", [&] { return header.at("token_bucket").get<std::vector<int>>(); });

    const json& hp = format_guard("hyperparams", [&]() -> const json& { return header.at("hyperparams"); });
    if (!hp.is_null()) {
        try {
            loaded.params = hyperparams_from_json(hp);
        } catch (const ConfigError& e) {
            throw FormatError(std::string("container hyperparams: ") + e.what());
        }
    }
    const json& gt = format_guard("ground_truth_boundaries",
                                  [&]() -> const json& { return header.at("ground_truth_boundaries"); });
    if (!gt.is_null()) loaded.truth = ground_truth_from_json(gt);

    if (dim < 1) throw FormatError("container header field 'dim': must be >= 1");
    if (grid_h < 1 || grid_w < 1) {
        throw FormatError("container header field 'grid_h'/'grid_w': must be >= 1");
    }

    const std::size_t video_count = num_frames * grid_h * grid_w * dim;
    const std::size_t audio_count = num_audio * dim;
    const std::size_t payload_off = header_off + header_len;
    const std::size_t expected = payload_off + (video_count + audio_count) * sizeof(float);
    if (bytes.size() < expected) {
        std::ostringstream msg;
        msg << "truncated payload: declared " << (video_count + audio_count)
            << " f32 values need " << expected - payload_off << " bytes, file has "
            << bytes.size() - payload_off;
        throw FormatError(msg.str());
    }
    if (bytes.size() > expected) {
        throw FormatError("payload length mismatch: trailing bytes after audio payload");
    }

    loaded.video.tokens.rows = num_frames * grid_h * grid_w;
    loaded.video.tokens.dim = dim;
    read_f32_payload(bytes.data() + payload_off, video_count, loaded.video.tokens.values);
    loaded.audio.tokens.rows = num_audio;
    loaded.audio.tokens.dim = dim;
    read_f32_payload(bytes.data() + payload_off + video_count * sizeof(float), audio_count,
                     loaded.audio.tokens.values);

    try {
        validate_pair(loaded.video, loaded.audio);
    } catch (const InvariantError& e) {
        throw FormatError(std::string("container invariant violation: ") + e.what());
    }
    return loaded;
}

} // namespace orf
