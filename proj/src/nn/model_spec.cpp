#include "rffw/nn/model.hpp"

#include <sstream>

namespace rffw::nn {

void ModelSpec::validate() const {
    if (input_len < 16) throw ConfigError("model input_len must be >= 16");
    if (input_channels != 2) throw ConfigError("model input_channels must be 2");
    if (num_classes < 2) throw ConfigError("model num_classes must be >= 2");
    if (stages.empty()) throw ConfigError("model needs at least one stage");
    auto check_conv = [](int ch, int k, int s, const std::string& where) {
        if (ch < 1 || k < 1 || s < 1)
            throw ConfigError("invalid conv descriptor at " + where);
    };
    check_conv(stem.out_channels, stem.kernel, stem.stride, "stem");
    int len = conv_out_len(input_len, stem.kernel, stem.stride);
    for (size_t i = 0; i < stages.size(); ++i) {
        const auto& st = stages[i];
        check_conv(st.channels, st.kernel, st.stride, "stage " + std::to_string(i));
        if (st.count < 1) throw ConfigError("stage count must be >= 1");
        len = conv_out_len(len, st.kernel, st.stride);
        if (len < 1)
            throw ConfigError("layer chain collapses to zero length at stage " + std::to_string(i));
    }
}

std::string ModelSpec::canonical() const {
    std::ostringstream os;
    os << "v1 len=" << input_len << " ch=" << input_channels << " stem=" << stem.out_channels
       << "," << stem.kernel << "," << stem.stride << " stages=";
    for (size_t i = 0; i < stages.size(); ++i) {
        if (i) os << "|";
        os << stages[i].channels << "," << stages[i].kernel << "," << stages[i].stride << ","
           << stages[i].count;
    }
    os << " classes=" << num_classes;
    return os.str();
}

namespace {

std::vector<int> parse_ints(const std::string& s, char sep) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(std::stoi(item));
    return out;
}

} // namespace

ModelSpec ModelSpec::from_canonical(const std::string& text) {
    std::istringstream is(text);
    std::string tok;
    is >> tok;
    if (tok != "v1") throw DataError("unsupported model spec version: " + tok);
    ModelSpec spec;
    spec.stages.clear();
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw DataError("bad model spec token: " + tok);
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "len") {
            spec.input_len = std::stoi(val);
        } else if (key == "ch") {
            spec.input_channels = std::stoi(val);
        } else if (key == "stem") {
            auto v = parse_ints(val, ',');
            if (v.size() != 3) throw DataError("bad stem descriptor");
            spec.stem = {v[0], v[1], v[2]};
        } else if (key == "stages") {
            std::stringstream ss(val);
            std::string part;
            while (std::getline(ss, part, '|')) {
                auto v = parse_ints(part, ',');
                if (v.size() != 4) throw DataError("bad stage descriptor");
                spec.stages.push_back({v[0], v[1], v[2], v[3]});
            }
        } else if (key == "classes") {
            spec.num_classes = std::stoi(val);
        } else {
            throw DataError("unknown model spec key: " + key);
        }
    }
    spec.validate();
    return spec;
}

ModelSpec ModelSpec::preset(const std::string& name, int input_len, int num_classes) {
    ModelSpec spec;
    spec.input_len = input_len;
    spec.num_classes = num_classes;
    if (name == "small") {
        spec.stem = {16, 7, 2};
        spec.stages = {{16, 3, 1, 1}, {32, 3, 2, 1}, {64, 3, 2, 1}, {64, 3, 2, 1}};
    } else if (name == "resnet34-1d") {
        spec.stem = {64, 7, 2};
        spec.stages = {{64, 3, 1, 3}, {128, 3, 2, 4}, {256, 3, 2, 6}, {512, 3, 2, 3}};
    } else {
        throw ConfigError("unknown model preset: " + name);
    }
    spec.validate();
    return spec;
}

} // namespace rffw::nn
