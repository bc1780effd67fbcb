#ifndef FIBQKD_HPP
#define FIBQKD_HPP

#include "fibqkd/adversary.hpp"
#include "fibqkd/channel.hpp"
#include "fibqkd/detection.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/key.hpp"
#include "fibqkd/parallel.hpp"
#include "fibqkd/protocol.hpp"
#include "fibqkd/rate_model.hpp"
#include "fibqkd/report.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/serialize.hpp"
#include "fibqkd/simulation.hpp"
#include "fibqkd/source.hpp"
#include "fibqkd/tribonacci.hpp"
#include "fibqkd/wire/frame.hpp"
#include "fibqkd/wire/session.hpp"
#include "fibqkd/wire/socket.hpp"
#include "fibqkd/wire/transport.hpp"

#endif // FIBQKD_HPP
