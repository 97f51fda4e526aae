class GripperPolicy(Policy):
    """Deliver every ball to its goal room.

    Preference order: drop a carried ball in its goal room, pick up a
    misplaced ball here, move toward a carried ball's goal, move toward
    a misplaced ball.
    """

    def choose(self, state, applicable):
        goal_room = {a[1]: a[2] for a in self.goal if a[0] == "at"}
        for i, act in enumerate(applicable):
            if act[0] == "drop" and goal_room.get(act[1]) == act[2]:
                return i
        for i, act in enumerate(applicable):
            if act[0] == "pick" and goal_room.get(act[1]) not in (None, act[2]):
                return i
        carried = [c[0] for c in self.atoms(state, "carry")]
        for i, act in enumerate(applicable):
            if act[0] == "move" and carried and goal_room.get(carried[0]) == act[2]:
                return i
        for i, act in enumerate(applicable):
            if act[0] != "move":
                continue
            for ball, room in goal_room.items():
                if ("at", ball, act[2]) in state and room != act[2]:
                    return i
        return 0
