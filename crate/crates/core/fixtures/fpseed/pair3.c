/* Constructed scan pair 3: sentinel walk vs bounded walk. */

int32 walk_marks(int32 *marks)
{
    int32 j;
    int32 c;
    for (j = 0; marks[j] >= 0; j++) {
        c = marks[j];
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
    }
    return c;
}

void read_lanes(int32 *lanes, int32 width)
{
    int32 i;
    int32 v;
    for (i = 0; i < width; i++) {
        v = lanes[i];
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
    }
}
