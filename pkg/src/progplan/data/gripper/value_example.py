class GripperValue(ValueFunction):
    """Estimated number of actions to bring every ball to its goal room.

    A misplaced ball still on the floor needs a pick and a drop; a
    carried ball needs only a drop.
    """

    def value(self, state):
        cost = 0
        for atom in self.goal:
            if atom[0] != "at" or atom in state:
                continue
            ball = atom[1]
            if any(c[0] == ball for c in self.atoms(state, "carry")):
                cost += 1
            else:
                cost += 2
        return cost
