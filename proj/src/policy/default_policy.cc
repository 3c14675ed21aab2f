/*
 * Copyright 2026 The carsec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "carsec/policy/policy.h"

namespace carsec::policy {

// Kept byte-identical to data/policies/default.policy.
const std::string& DefaultPolicyDocument() {
  static const std::string* doc = new std::string(R"policy(# Default role access rights: six roles over seventeen vehicle functions.
# Every cell is written out, including '---'. Object-level entries
# override any macro-level grant.

role Owner root
role Driver
role Technician
role ChildOccupant
role Valet
role Passenger

object Engine/Start Engine
object Body/Open Trunk
object Body/Open Doors
object Chassis/Limit speed
object Engine/Fuel Level
object Engine/Diagnosis
object Engine/SW Update
object Chassis/Park car
object Infotainment/Home
object Body/Alarm
object Body/Start A/C
object Body/Defrost
object Body/Mirrors
object Body/Lights
object Infotainment/Play music
object Infotainment/Limit volume
object Infotainment/Trip Computer

# Start Engine
Owner; Start Engine; ---
Driver; Start Engine; --e
Technician; Start Engine; --e
ChildOccupant; Start Engine; ---
Valet; Start Engine; --e
Passenger; Start Engine; ---

# Open Trunk
Owner; Open Trunk; --e
Driver; Open Trunk; --e
Technician; Open Trunk; --e
ChildOccupant; Open Trunk; ---
Valet; Open Trunk; ---
Passenger; Open Trunk; --e

# Open Doors
Owner; Open Doors; --e
Driver; Open Doors; --e
Technician; Open Doors; --e
ChildOccupant; Open Doors; --e
Valet; Open Doors; --e
Passenger; Open Doors; --e

# Limit speed
Owner; Limit speed; rw-
Driver; Limit speed; rw-
Technician; Limit speed; ---
ChildOccupant; Limit speed; ---
Valet; Limit speed; ---
Passenger; Limit speed; ---

# Fuel Level
Owner; Fuel Level; r--
Driver; Fuel Level; r--
Technician; Fuel Level; r--
ChildOccupant; Fuel Level; ---
Valet; Fuel Level; r--
Passenger; Fuel Level; ---

# Diagnosis
Owner; Diagnosis; --e
Driver; Diagnosis; --e
Technician; Diagnosis; --e
ChildOccupant; Diagnosis; ---
Valet; Diagnosis; ---
Passenger; Diagnosis; ---

# SW Update
Owner; SW Update; ---
Driver; SW Update; ---
Technician; SW Update; --e
ChildOccupant; SW Update; ---
Valet; SW Update; ---
Passenger; SW Update; ---

# Park car
Owner; Park car; ---
Driver; Park car; --e
Technician; Park car; --e
ChildOccupant; Park car; ---
Valet; Park car; --e
Passenger; Park car; ---

# Home
Owner; Home; --e
Driver; Home; --e
Technician; Home; --e
ChildOccupant; Home; ---
Valet; Home; ---
Passenger; Home; ---

# Alarm
Owner; Alarm; --e
Driver; Alarm; --e
Technician; Alarm; --e
ChildOccupant; Alarm; ---
Valet; Alarm; --e
Passenger; Alarm; ---

# Start A/C
Owner; Start A/C; --e
Driver; Start A/C; --e
Technician; Start A/C; --e
ChildOccupant; Start A/C; ---
Valet; Start A/C; --e
Passenger; Start A/C; --e

# Defrost
Owner; Defrost; --e
Driver; Defrost; --e
Technician; Defrost; --e
ChildOccupant; Defrost; ---
Valet; Defrost; --e
Passenger; Defrost; ---

# Mirrors
Owner; Mirrors; --e
Driver; Mirrors; --e
Technician; Mirrors; --e
ChildOccupant; Mirrors; ---
Valet; Mirrors; --e
Passenger; Mirrors; ---

# Lights
Owner; Lights; --e
Driver; Lights; --e
Technician; Lights; --e
ChildOccupant; Lights; ---
Valet; Lights; --e
Passenger; Lights; ---

# Play music
Owner; Play music; --e
Driver; Play music; --e
Technician; Play music; --e
ChildOccupant; Play music; --e
Valet; Play music; --e
Passenger; Play music; --e

# Limit volume
Owner; Limit volume; rw-
Driver; Limit volume; rw-
Technician; Limit volume; rw-
ChildOccupant; Limit volume; ---
Valet; Limit volume; ---
Passenger; Limit volume; ---

# Trip Computer
Owner; Trip Computer; rw-
Driver; Trip Computer; rw-
Technician; Trip Computer; r--
ChildOccupant; Trip Computer; ---
Valet; Trip Computer; ---
Passenger; Trip Computer; ---
)policy");
  return *doc;
}

}  // namespace carsec::policy
