#pragma once

#include <memory>
#include <string>

#include "poqm/bb84.hpp"
#include "poqm/core.hpp"
#include "poqm/puzzle.hpp"

namespace poqm {

/// Protocol registry shared by the CLI and the networked endpoints.
/// Names: bb84-it, bb84-rsp, puzzle.
inline std::unique_ptr<PoqmProtocol> make_protocol(const std::string& name,
                                                   ProtocolParams params) {
    if (name == "bb84-it")
        return std::make_unique<bb84::ItProtocol>(std::move(params));
    if (name == "bb84-rsp")
        return std::make_unique<bb84::IdealRspProtocol>(std::move(params));
    if (name == "puzzle") return puzzle::compiled_toy_puzzle(std::move(params));
    throw std::invalid_argument("unknown protocol: " + name);
}

}  // namespace poqm
