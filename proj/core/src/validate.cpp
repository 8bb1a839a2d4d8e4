#include "meshpde/validate.hpp"

#include <cmath>
#include <fstream>

#include "meshpde/dataset.hpp"
#include "meshpde/fem.hpp"
#include "meshpde/graph.hpp"
#include "meshpde/graphnet.hpp"
#include "meshpde/io.hpp"

namespace meshpde::validate {

namespace {

std::string sniff_type(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[17] = {};
    in.read(magic, 16);
    if (in.gcount() >= 4) {
        if (std::string_view(magic, 4) == "PGN1") return "graph";
        if (std::string_view(magic, 4) == "PTR1") return "trajectory";
        if (std::string_view(magic, 4) == "PMP1") return "checkpoint";
    }
    if (in.gcount() >= 16 && std::string_view(magic, 16) == "MESHPDE-MANIFEST") return "manifest";
    return "unknown";
}

void check_graph(const std::filesystem::path& path, FileReport& rep) {
    const Graph g = load_graph(path);
    for (auto& v : graph_violations(g)) rep.violations.push_back(std::move(v));
}

void check_trajectory(const std::filesystem::path& path, FileReport& rep) {
    const Trajectory t = load_trajectory(path);
    if (t.frame_count() < 1) rep.violations.push_back("trajectory has no frames");
    if (t.dt_record <= 0 || t.dt_solver <= 0) {
        rep.violations.push_back("non-positive time step metadata");
    } else {
        const double ratio = t.dt_record / t.dt_solver;
        if (std::abs(ratio - std::round(ratio)) > 1e-9) {
            rep.violations.push_back("dt_record is not an integer multiple of dt_solver");
        }
    }
    if (!t.frames.allFinite()) rep.violations.push_back("non-finite frame values");
    if (t.pde.kind != PdeKind::Heat && t.pde.lambda2 <= 0.0) {
        rep.violations.push_back("lambda2 must be positive");
    }
}

void check_checkpoint(const std::filesystem::path& path, FileReport& rep) {
    const gnn::Checkpoint c = gnn::load_checkpoint(path);
    if (c.model.stats.node_std <= 0.0) rep.violations.push_back("non-positive node std");
    for (const auto& mlp : c.model.message_net) {
        for (const auto& w : mlp.weights) {
            if (!w.allFinite()) rep.violations.push_back("non-finite message-net weights");
        }
    }
    for (const auto& mlp : c.model.update_net) {
        for (const auto& w : mlp.weights) {
            if (!w.allFinite()) rep.violations.push_back("non-finite update-net weights");
        }
    }
}

}  // namespace

FileReport validate_file(const std::filesystem::path& path) {
    FileReport rep;
    rep.path = path.string();
    if (!std::filesystem::exists(path)) {
        rep.detected_type = "missing";
        rep.violations.push_back("file does not exist");
        return rep;
    }
    rep.detected_type = sniff_type(path);
    try {
        if (rep.detected_type == "graph") {
            check_graph(path, rep);
        } else if (rep.detected_type == "trajectory") {
            check_trajectory(path, rep);
        } else if (rep.detected_type == "checkpoint") {
            check_checkpoint(path, rep);
        } else if (rep.detected_type == "manifest") {
            data::load_manifest(path);  // existence + checksum checks built in
        } else {
            rep.violations.push_back("unrecognized file type");
        }
    } catch (const std::exception& e) {
        rep.violations.push_back(e.what());
    }
    return rep;
}

std::string report_text(const FileReport& report) {
    std::string out = report.path + " [" + report.detected_type + "]: ";
    if (report.ok()) return out + "OK\n";
    out += "FAIL\n";
    for (const auto& v : report.violations) out += "  - " + v + "\n";
    return out;
}

}  // namespace meshpde::validate
